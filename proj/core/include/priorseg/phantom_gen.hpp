#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "priorseg/cohort.hpp"
#include "priorseg/nifti_io.hpp"

namespace priorseg {

struct MorphOp {
    enum class Kind { None, Erode, Dilate };
    Kind kind = Kind::None;
    int radius_vox = 0;
};

// Slice span as fractions of the z range, inclusive on both ends.
struct SliceSpan {
    double lo = 0.0;
    double hi = 0.0;
};

struct PhantomSpec {
    std::array<int, 3> dims{64, 64, 96};
    std::array<float, 3> spacing_mm{1.0f, 1.0f, 1.0f};
    int female_count = 10;
    int male_count = 10;
    double sex_size_ratio = 1.0;  // female organ radii relative to male
    MorphOp female_error;
    MorphOp male_error;
    std::uint64_t seed = 20240801;
    SliceSpan t1_span{0.78, 0.82};
    SliceSpan stomach_span{0.55, 0.64};
    SliceSpan l4_span{0.24, 0.28};
};

// Parses the spec JSON (all fields optional, defaults above) and validates:
// dims >= 32 per axis, monotone non-touching landmark spans, counts >= 0.
PhantomSpec phantom_spec_from_json(const std::string& text);
PhantomSpec load_phantom_spec(const std::filesystem::path& path);

// One patient's geometry, before any file is written. `structures` holds the
// 15 prior-structure masks; the vertebra landmarks are separate because they
// are not part of the structure vocabulary.
struct PatientVolumes {
    Volume3D ct;
    std::map<std::string, LabelMap> structures;
    LabelMap vertebra_t1;
    LabelMap vertebra_l4;
    LabelMap gt_ctv;
    LabelMap pred_ctv;
};

// Deterministic in (spec.seed, index): the per-patient jitter stream does not
// depend on sex, so equal-size groups with ratio 1 and equal error models
// produce identical score distributions.
PatientVolumes generate_patient_volumes(const PhantomSpec& spec, Sex sex, int index);

// Writes the patient's files under out_dir/<patient_id>/ and returns a
// manifest-ready record with absolute paths.
PatientRecord generate_patient(const PhantomSpec& spec, Sex sex, int index,
                               const std::filesystem::path& out_dir);

// Full cohort plus manifest.json in out_dir. `threads` parallelizes over
// patients; output is identical for any thread count.
CohortManifest generate_cohort(const PhantomSpec& spec, const std::filesystem::path& out_dir,
                               int threads = 1);

// Morphology on the voxel grid via the squared distance transform with unit
// weights: dilate keeps distance <= r to the foreground, erode keeps
// foreground with distance > r to the background.
LabelMap erode(const LabelMap& mask, int radius_vox);
LabelMap dilate(const LabelMap& mask, int radius_vox);

const std::vector<std::string>& phantom_structure_vocabulary();

}  // namespace priorseg
