#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "priorseg/error.hpp"

namespace priorseg {

enum class Sex { Female, Male };
const char* to_string(Sex sex);
Sex sex_from_string(std::string_view s);

enum class Landmark { VertebraT1, Stomach, VertebraL4 };
const char* to_string(Landmark lm);

struct PatientRecord {
    std::string patient_id;
    Sex sex = Sex::Female;
    std::filesystem::path ct_path;
    std::filesystem::path gt_ctv_path;
    std::optional<std::filesystem::path> pred_ctv_path;
    std::map<std::string, std::filesystem::path> structure_paths;
    std::map<Landmark, std::filesystem::path> landmark_paths;
};

struct CohortManifest {
    std::vector<PatientRecord> records;           // sorted by patient_id
    std::vector<std::string> structure_vocabulary;  // canonical names, no duplicates
    bool superior_is_plus_z = true;               // which end of z is the head
};

// Ground-truth prior structures and the TotalSegmentator-derived set, in the
// order intensity codes are assigned when the manifest vocabulary does not
// dictate otherwise. Laterality pairs are single merged masks.
const std::vector<std::string>& gt_structure_names();
const std::vector<std::string>& ts_structure_names();

// Trim, lower-case, spaces to underscores.
std::string canonical_structure_name(std::string_view name);

// Loads and validates a manifest JSON file. Relative paths resolve against
// the manifest's directory; every referenced file must exist.
CohortManifest load_manifest(const std::filesystem::path& path);

// Writes a manifest with paths stored relative to the output file when
// possible (keeps generated cohorts relocatable).
void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path);

// Partition of all patient ids by sex; both groups always present, possibly
// empty.
std::map<Sex, std::vector<std::string>> stratify(const CohortManifest& manifest);

}  // namespace priorseg
