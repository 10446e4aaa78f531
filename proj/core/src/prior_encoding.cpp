#include "priorseg/prior_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "priorseg/conventions.hpp"

namespace priorseg {

using nlohmann::ordered_json;

const char* to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::MiZ: return "mi-z";
        case StrategyKind::EqZ: return "eq-z";
        case StrategyKind::CropZ: return "crop-z";
        case StrategyKind::Mi: return "mi";
        case StrategyKind::MiTs: return "mi-ts";
    }
    return "?";
}

StrategyKind strategy_from_string(std::string_view id) {
    if (id == "mi-z") return StrategyKind::MiZ;
    if (id == "eq-z") return StrategyKind::EqZ;
    if (id == "crop-z") return StrategyKind::CropZ;
    if (id == "mi") return StrategyKind::Mi;
    if (id == "mi-ts") return StrategyKind::MiTs;
    throw Error(ErrorCode::SchemaError,
                "unknown strategy \"" + std::string(id) +
                    "\" (expected mi-z, eq-z, crop-z, mi, or mi-ts)");
}

EncodingStrategy make_strategy(StrategyKind kind, std::span<const std::string> vocabulary_order) {
    const auto& canonical =
        kind == StrategyKind::MiTs ? ts_structure_names() : gt_structure_names();

    EncodingStrategy s;
    s.kind = kind;
    s.zscore = kind == StrategyKind::MiZ || kind == StrategyKind::EqZ ||
               kind == StrategyKind::CropZ;

    if (vocabulary_order.empty()) {
        s.structure_set = canonical;
        return s;
    }
    const std::set<std::string> wanted(canonical.begin(), canonical.end());
    std::set<std::string> placed;
    for (const auto& name : vocabulary_order)
        if (wanted.count(name) && placed.insert(name).second) s.structure_set.push_back(name);
    for (const auto& name : canonical)  // names the vocabulary does not mention keep canonical order
        if (!placed.count(name)) s.structure_set.push_back(name);
    return s;
}

IntensityCode assign_intensities(std::span<const std::string> structures, IntensityMode mode) {
    if (structures.empty())
        throw Error(ErrorCode::SchemaError, "intensity assignment needs at least one structure");
    if (structures.size() > 255)
        throw Error(ErrorCode::TooManyStructures,
                    std::to_string(structures.size()) + " structures (max 255)");
    IntensityCode code;
    const auto n = static_cast<double>(structures.size());
    for (std::size_t i = 0; i < structures.size(); ++i) {
        const int value = mode == IntensityMode::Equal
                              ? 255
                              : static_cast<int>(std::llround(255.0 * static_cast<double>(i + 1) / n));
        code.assignments.emplace_back(structures[i], value);
    }
    return code;
}

Volume3D rasterize_channel(const NiftiHeader& grid, std::span<const LabelMap> masks,
                           const IntensityCode& code) {
    if (masks.size() != code.assignments.size())
        throw Error(ErrorCode::SchemaError,
                    "rasterize_channel: " + std::to_string(masks.size()) + " masks for " +
                        std::to_string(code.assignments.size()) + " intensity assignments");
    for (const auto& m : masks) check_aligned(grid, m.header);

    Volume3D channel = Volume3D::zeros(grid.dims, grid.pixdim_mm);
    channel.header = grid;
    channel.header.datatype = Datatype::Uint8;
    channel.data.assign(grid.voxel_count(), 0.0);

    // Paint lowest-precedence first so the smallest structure ends up on top.
    std::vector<std::size_t> order(masks.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> counts(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) counts[i] = masks[i].foreground_count();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return a > b;
    });

    for (std::size_t oi : order) {
        const double value = static_cast<double>(code.assignments[oi].second);
        const auto& mask = masks[oi].data;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] > 0) channel.data[i] = value;
    }
    return channel;
}

std::pair<Volume3D, NormalizationStats> zscore(const Volume3D& channel) {
    if (channel.data.empty())
        throw Error(ErrorCode::SchemaError, "zscore of an empty channel");

    const std::size_t n = channel.data.size();
    double sum = 0.0;
    for (double v : channel.data) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : channel.data) {
        const double d = v - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));

    Volume3D out;
    out.header = channel.header;
    out.header.datatype = Datatype::Float32;
    out.data.resize(n);
    if (sd == 0.0) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
    } else {
        for (std::size_t i = 0; i < n; ++i) out.data[i] = (channel.data[i] - mean) / sd;
    }
    return {std::move(out), NormalizationStats{mean, sd}};
}

std::pair<Volume3D, Volume3D> crop_fill(const Volume3D& ct, std::span<const LabelMap> masks) {
    for (const auto& m : masks) check_aligned(ct.header, m.header);

    std::vector<std::uint8_t> inside(ct.data.size(), 0);
    for (const auto& m : masks)
        for (std::size_t i = 0; i < m.data.size(); ++i)
            if (m.data[i] > 0) inside[i] = 1;

    Volume3D a, b;
    a.header = b.header = ct.header;
    a.header.datatype = b.header.datatype = Datatype::Float32;
    a.data.resize(ct.data.size());
    b.data.resize(ct.data.size());
    for (std::size_t i = 0; i < ct.data.size(); ++i) {
        a.data[i] = inside[i] ? ct.data[i] : 0.0;
        b.data[i] = inside[i] ? ct.data[i] : 255.0;
    }
    return {std::move(a), std::move(b)};
}

EncodedChannels encode(const EncodingStrategy& strategy, const PatientRecord& patient) {
    EncodedChannels enc;
    enc.strategy = strategy;

    const Volume3D ct = read_volume(patient.ct_path);

    std::vector<LabelMap> masks;
    masks.reserve(strategy.structure_set.size());
    for (const auto& name : strategy.structure_set) {
        auto it = patient.structure_paths.find(name);
        if (it == patient.structure_paths.end())
            throw Error(ErrorCode::MissingStructure,
                        "patient \"" + patient.patient_id + "\" has no \"" + name + "\" mask");
        LabelMap m = read_labelmap(it->second);
        check_aligned(ct.header, m.header);
        masks.push_back(std::move(m));
    }

    if (strategy.kind == StrategyKind::CropZ) {
        auto [a, b] = crop_fill(ct, masks);
        auto [az, sa] = zscore(a);
        auto [bz, sb] = zscore(b);
        enc.channels.push_back(std::move(az));
        enc.channels.push_back(std::move(bz));
        enc.stats = {sa, sb};
        return enc;
    }

    enc.code = assign_intensities(strategy.structure_set,
                                  strategy.kind == StrategyKind::EqZ ? IntensityMode::Equal
                                                                     : IntensityMode::Distinct);
    Volume3D channel = rasterize_channel(ct.header, masks, enc.code);
    if (strategy.zscore) {
        auto [z, s] = zscore(channel);
        enc.channels.push_back(std::move(z));
        enc.stats = {s};
    } else {
        enc.channels.push_back(std::move(channel));
    }
    return enc;
}

std::filesystem::path write_encoded(const EncodedChannels& enc, const std::string& patient_id,
                                    const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());

    const std::string strategy_id = to_string(enc.strategy.kind);
    ordered_json sidecar;
    sidecar["patient_id"] = patient_id;
    sidecar["strategy"] = strategy_id;
    sidecar["zscore"] = enc.strategy.zscore;

    ordered_json channel_names = ordered_json::array();
    for (std::size_t k = 0; k < enc.channels.size(); ++k) {
        const std::string name =
            patient_id + "_" + strategy_id + "_" + std::to_string(k) + ".nii.gz";
        const Datatype dt = enc.strategy.zscore ? Datatype::Float32 : Datatype::Uint8;
        write_volume(enc.channels[k], out_dir / name, dt);
        channel_names.push_back(name);
    }
    sidecar["channels"] = std::move(channel_names);

    if (enc.code.assignments.empty()) {
        sidecar["intensity_code"] = nullptr;
    } else {
        ordered_json code = ordered_json::object();
        for (const auto& [name, value] : enc.code.assignments) code[name] = value;
        sidecar["intensity_code"] = std::move(code);
    }
    if (enc.stats.empty()) {
        sidecar["normalization"] = nullptr;
    } else {
        ordered_json stats = ordered_json::array();
        for (const auto& s : enc.stats) stats.push_back({{"mean", s.mean}, {"std", s.std}});
        sidecar["normalization"] = std::move(stats);
    }
    sidecar["conventions"] = convention_notes();

    const auto sidecar_path = out_dir / (patient_id + "_" + strategy_id + ".json");
    std::ofstream out(sidecar_path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + sidecar_path.string());
    out << sidecar.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + sidecar_path.string());
    return sidecar_path;
}

}  // namespace priorseg
