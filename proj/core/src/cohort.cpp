#include "priorseg/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace priorseg {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Sex sex) { return sex == Sex::Female ? "female" : "male"; }

Sex sex_from_string(std::string_view s) {
    if (s == "female") return Sex::Female;
    if (s == "male") return Sex::Male;
    throw Error(ErrorCode::SchemaError,
                "sex must be \"female\" or \"male\", got \"" + std::string(s) + "\"");
}

const char* to_string(Landmark lm) {
    switch (lm) {
        case Landmark::VertebraT1: return "vertebra_T1";
        case Landmark::Stomach: return "stomach";
        case Landmark::VertebraL4: return "vertebra_L4";
    }
    return "?";
}

const std::vector<std::string>& gt_structure_names() {
    static const std::vector<std::string> names{"spleen", "liver",   "eyes",  "kidneys",
                                                "femurs", "stomach", "heart"};
    return names;
}

const std::vector<std::string>& ts_structure_names() {
    static const std::vector<std::string> names{
        "humeri",  "scapulae", "clavicles",       "femurs",   "hips",
        "sacrum",  "spleen",   "liver",           "stomach",  "urinary_bladder",
        "pancreas", "kidneys", "iliopsoas_muscles"};
    return names;
}

std::string canonical_structure_name(std::string_view name) {
    std::size_t begin = 0, end = name.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(name[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(name[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const char c = name[i];
        out.push_back(c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

std::filesystem::path require_file(const std::filesystem::path& path, const std::string& what) {
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::MissingFile, what + ": " + path.string() + " does not exist");
    return path;
}

const json& require_field(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw Error(ErrorCode::SchemaError, context + ": missing field \"" + key + "\"");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& context) {
    const json& f = require_field(obj, key, context);
    if (!f.is_string())
        throw Error(ErrorCode::SchemaError, context + ": field \"" + key + "\" must be a string");
    return f.get<std::string>();
}

}  // namespace

CohortManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, "manifest " + path.string() + ": " + e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorCode::SchemaError, "manifest root must be a JSON object");

    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    CohortManifest m;
    if (doc.contains("superior_is_plus_z")) {
        if (!doc["superior_is_plus_z"].is_boolean())
            throw Error(ErrorCode::SchemaError, "manifest: \"superior_is_plus_z\" must be a boolean");
        m.superior_is_plus_z = doc["superior_is_plus_z"].get<bool>();
    }
    const json& structures = require_field(doc, "structures", "manifest");
    if (!structures.is_array())
        throw Error(ErrorCode::SchemaError, "manifest: \"structures\" must be an array");
    std::set<std::string> vocab;
    for (const auto& s : structures) {
        if (!s.is_string())
            throw Error(ErrorCode::SchemaError, "manifest: structure names must be strings");
        const auto name = canonical_structure_name(s.get<std::string>());
        if (name.empty())
            throw Error(ErrorCode::SchemaError, "manifest: empty structure name");
        if (!vocab.insert(name).second)
            throw Error(ErrorCode::SchemaError,
                        "manifest: duplicate structure name \"" + name + "\"");
        m.structure_vocabulary.push_back(name);
    }

    const json& patients = require_field(doc, "patients", "manifest");
    if (!patients.is_array())
        throw Error(ErrorCode::SchemaError, "manifest: \"patients\" must be an array");

    std::set<std::string> seen_ids;
    for (const auto& p : patients) {
        if (!p.is_object())
            throw Error(ErrorCode::SchemaError, "manifest: patient entries must be objects");
        PatientRecord r;
        r.patient_id = require_string(p, "id", "patient");
        const std::string context = "patient \"" + r.patient_id + "\"";
        if (r.patient_id.empty())
            throw Error(ErrorCode::SchemaError, "patient: empty \"id\"");
        if (!seen_ids.insert(r.patient_id).second)
            throw Error(ErrorCode::DuplicatePatientId, "patient id \"" + r.patient_id + "\"");

        r.sex = sex_from_string(require_string(p, "sex", context));
        r.ct_path = require_file(resolve(base, require_string(p, "ct", context)), context + " ct");
        r.gt_ctv_path =
            require_file(resolve(base, require_string(p, "gt_ctv", context)), context + " gt_ctv");
        if (p.contains("pred_ctv") && !p["pred_ctv"].is_null()) {
            if (!p["pred_ctv"].is_string())
                throw Error(ErrorCode::SchemaError, context + ": \"pred_ctv\" must be a string");
            r.pred_ctv_path = require_file(resolve(base, p["pred_ctv"].get<std::string>()),
                                           context + " pred_ctv");
        }

        const json& structs = require_field(p, "structures", context);
        if (!structs.is_object())
            throw Error(ErrorCode::SchemaError, context + ": \"structures\" must be an object");
        for (auto it = structs.begin(); it != structs.end(); ++it) {
            const auto name = canonical_structure_name(it.key());
            if (!vocab.count(name))
                throw Error(ErrorCode::UnknownStructureName,
                            context + ": structure \"" + name + "\" not in vocabulary");
            if (!it.value().is_string())
                throw Error(ErrorCode::SchemaError,
                            context + ": structure path for \"" + name + "\" must be a string");
            r.structure_paths[name] = require_file(
                resolve(base, it.value().get<std::string>()), context + " structure " + name);
        }

        const json& lms = require_field(p, "landmarks", context);
        if (!lms.is_object())
            throw Error(ErrorCode::SchemaError, context + ": \"landmarks\" must be an object");
        for (Landmark lm : {Landmark::VertebraT1, Landmark::Stomach, Landmark::VertebraL4}) {
            const char* key = to_string(lm);
            if (!lms.contains(key))
                throw Error(ErrorCode::SchemaError,
                            context + ": landmarks missing \"" + std::string(key) + "\"");
            if (!lms[key].is_string())
                throw Error(ErrorCode::SchemaError,
                            context + ": landmark \"" + std::string(key) + "\" must be a string");
            r.landmark_paths[lm] = require_file(resolve(base, lms[key].get<std::string>()),
                                                context + " landmark " + key);
        }

        m.records.push_back(std::move(r));
    }

    std::sort(m.records.begin(), m.records.end(),
              [](const PatientRecord& a, const PatientRecord& b) {
                  return a.patient_id < b.patient_id;
              });
    return m;
}

void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path) {
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto rel = [&](const std::filesystem::path& p) {
        const auto r = p.lexically_proximate(base);
        return r.empty() ? p.generic_string() : r.generic_string();
    };

    ordered_json doc;
    doc["superior_is_plus_z"] = manifest.superior_is_plus_z;
    doc["structures"] = manifest.structure_vocabulary;
    doc["patients"] = ordered_json::array();
    for (const auto& r : manifest.records) {
        ordered_json p;
        p["id"] = r.patient_id;
        p["sex"] = to_string(r.sex);
        p["ct"] = rel(r.ct_path);
        p["gt_ctv"] = rel(r.gt_ctv_path);
        if (r.pred_ctv_path) p["pred_ctv"] = rel(*r.pred_ctv_path);
        ordered_json structs = ordered_json::object();
        for (const auto& [name, sp] : r.structure_paths) structs[name] = rel(sp);
        p["structures"] = std::move(structs);
        ordered_json lms = ordered_json::object();
        for (const auto& [lm, lp] : r.landmark_paths) lms[to_string(lm)] = rel(lp);
        p["landmarks"] = std::move(lms);
        doc["patients"].push_back(std::move(p));
    }

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

std::map<Sex, std::vector<std::string>> stratify(const CohortManifest& manifest) {
    std::map<Sex, std::vector<std::string>> groups{{Sex::Female, {}}, {Sex::Male, {}}};
    for (const auto& r : manifest.records) groups[r.sex].push_back(r.patient_id);
    return groups;
}

}  // namespace priorseg
