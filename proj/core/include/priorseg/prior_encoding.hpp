#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "priorseg/cohort.hpp"
#include "priorseg/nifti_io.hpp"

namespace priorseg {

enum class StrategyKind { MiZ, EqZ, CropZ, Mi, MiTs };

// CLI / file-name identifiers: mi-z, eq-z, crop-z, mi, mi-ts.
const char* to_string(StrategyKind kind);
StrategyKind strategy_from_string(std::string_view id);

struct EncodingStrategy {
    StrategyKind kind;
    std::vector<std::string> structure_set;  // order fixes the intensity codes
    bool zscore;
};

// Builds the strategy for `kind`. The structure set is the ground-truth
// vocabulary for all kinds except MiTs, which uses the TotalSegmentator set.
// When `vocabulary_order` is given, the set is reordered to follow it.
EncodingStrategy make_strategy(StrategyKind kind,
                               std::span<const std::string> vocabulary_order = {});

enum class IntensityMode { Distinct, Equal };

struct IntensityCode {
    // (structure, intensity) in assignment order; background is 0.
    std::vector<std::pair<std::string, int>> assignments;
};

// Distinct mode gives structure i (1-based) round(255*i/N); equal mode gives
// every structure 255.
IntensityCode assign_intensities(std::span<const std::string> structures, IntensityMode mode);

// Paints masks into one channel on `grid`. Overlaps: the structure with fewer
// foreground voxels wins; ties go to the earlier code assignment.
Volume3D rasterize_channel(const NiftiHeader& grid, std::span<const LabelMap> masks,
                           const IntensityCode& code);

struct NormalizationStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

// (x - mean) / std over all voxels; a constant channel maps to all zeros with
// std recorded as 0.
std::pair<Volume3D, NormalizationStats> zscore(const Volume3D& channel);

// Pre-normalization Crop-Z channels: CT intensity inside the union of masks;
// outside is 0 in the first channel and 255 in the second.
std::pair<Volume3D, Volume3D> crop_fill(const Volume3D& ct, std::span<const LabelMap> masks);

struct EncodedChannels {
    EncodingStrategy strategy;
    IntensityCode code;  // empty for CropZ
    std::vector<Volume3D> channels;
    std::vector<NormalizationStats> stats;  // one per channel when z-scored
};

// Runs one strategy for one patient: loads the CT grid and the strategy's
// structure masks from the record and produces the channel volume(s).
EncodedChannels encode(const EncodingStrategy& strategy, const PatientRecord& patient);

// Writes {patient_id}_{strategy}_{k}.nii.gz plus the {patient_id}_{strategy}.json
// sidecar into `out_dir`. Returns the sidecar path.
std::filesystem::path write_encoded(const EncodedChannels& enc, const std::string& patient_id,
                                    const std::filesystem::path& out_dir);

}  // namespace priorseg
