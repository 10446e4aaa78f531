#include "priorseg/phantom_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "priorseg/parallel.hpp"
#include "priorseg/surface_metrics.hpp"

namespace priorseg {

using nlohmann::json;

namespace {

// Counter-based generator with a fixed algorithm so phantom geometry does not
// depend on the standard library's distribution implementations.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    // inclusive range; modulo bias is irrelevant for jitter draws
    int in_range(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

std::uint64_t patient_stream_seed(std::uint64_t seed, int index) {
    return seed ^ (0xD6E8FEB86659FD93ull * static_cast<std::uint64_t>(index + 1));
}

// All geometry is rasterized from integer coordinates in eighth-voxel units,
// so output is identical across platforms.
struct Ellipsoid8 {
    std::int64_t cx, cy, cz;
    std::int64_t rx, ry, rz;
};

using int128 = __int128;

void paint_ellipsoid(LabelMap& mask, const Ellipsoid8& e) {
    if (e.rx <= 0 || e.ry <= 0 || e.rz <= 0) return;
    const auto& dims = mask.header.dims;
    const auto clampi = [](std::int64_t v, int lo, int hi) {
        return static_cast<int>(std::min<std::int64_t>(std::max<std::int64_t>(v, lo), hi));
    };
    const int x0 = clampi((e.cx - e.rx) / 8 - 1, 0, dims[0] - 1);
    const int x1 = clampi((e.cx + e.rx) / 8 + 1, 0, dims[0] - 1);
    const int y0 = clampi((e.cy - e.ry) / 8 - 1, 0, dims[1] - 1);
    const int y1 = clampi((e.cy + e.ry) / 8 + 1, 0, dims[1] - 1);
    const int z0 = clampi((e.cz - e.rz) / 8 - 1, 0, dims[2] - 1);
    const int z1 = clampi((e.cz + e.rz) / 8 + 1, 0, dims[2] - 1);

    const std::int64_t ryz = e.ry * e.rz, rxz = e.rx * e.rz, rxy = e.rx * e.ry;
    const int128 rhs = static_cast<int128>(e.rx * ryz) * (e.rx * ryz);
    for (int z = z0; z <= z1; ++z) {
        const std::int64_t dz = 8ll * z - e.cz;
        const int128 tz = static_cast<int128>(dz * dz) * (rxy * rxy);
        for (int y = y0; y <= y1; ++y) {
            const std::int64_t dy = 8ll * y - e.cy;
            const int128 ty = static_cast<int128>(dy * dy) * (rxz * rxz);
            if (ty + tz > rhs) continue;
            for (int x = x0; x <= x1; ++x) {
                const std::int64_t dx = 8ll * x - e.cx;
                const int128 tx = static_cast<int128>(dx * dx) * (ryz * ryz);
                if (tx + ty + tz <= rhs) mask.at(x, y, z) = 1;
            }
        }
    }
}

struct OrganTemplate {
    const char* name;
    double cx, cy, cz;  // fractions of the grid extent
    double rx, ry, rz;
    bool mirrored;      // paired instance at (1 - cx)
    bool is_landmark;   // z geometry pinned by the landmark spans, z unjittered
    int ct_value;
};

// 15 prior structures (ground-truth set plus the TotalSegmentator-only ones)
// and the two vertebra landmarks. Laterality pairs are single merged masks.
constexpr OrganTemplate kOrgans[] = {
    {"spleen", 0.73, 0.45, 0.575, 0.070, 0.065, 0.040, false, false, 90},
    {"liver", 0.33, 0.45, 0.50, 0.155, 0.125, 0.065, false, false, 100},
    {"eyes", 0.42, 0.35, 0.90, 0.035, 0.035, 0.022, true, false, 60},
    {"kidneys", 0.36, 0.62, 0.40, 0.055, 0.050, 0.050, true, false, 80},
    {"femurs", 0.36, 0.47, 0.095, 0.045, 0.045, 0.080, true, false, 110},
    {"stomach", 0.52, 0.40, 0.0, 0.085, 0.070, 0.0, false, true, 70},
    {"heart", 0.47, 0.42, 0.72, 0.085, 0.075, 0.048, false, false, 95},
    {"humeri", 0.15, 0.47, 0.745, 0.032, 0.032, 0.060, true, false, 115},
    {"scapulae", 0.27, 0.65, 0.76, 0.048, 0.028, 0.048, true, false, 105},
    {"clavicles", 0.33, 0.33, 0.805, 0.055, 0.022, 0.014, true, false, 110},
    {"hips", 0.34, 0.54, 0.17, 0.058, 0.052, 0.052, true, false, 112},
    {"sacrum", 0.50, 0.66, 0.185, 0.042, 0.038, 0.042, false, false, 108},
    {"urinary_bladder", 0.50, 0.40, 0.115, 0.048, 0.048, 0.032, false, false, 55},
    {"pancreas", 0.47, 0.56, 0.545, 0.095, 0.032, 0.018, false, false, 75},
    {"iliopsoas_muscles", 0.42, 0.42, 0.14, 0.030, 0.030, 0.070, true, false, 65},
    {"vertebra_t1", 0.50, 0.64, 0.0, 0.032, 0.032, 0.0, false, true, 120},
    {"vertebra_l4", 0.50, 0.64, 0.0, 0.038, 0.038, 0.0, false, true, 120},
};

int slice_of(double frac, int nz) {
    return static_cast<int>(std::llround(frac * static_cast<double>(nz - 1)));
}

MorphOp parse_morph(const json& j, const std::string& context) {
    MorphOp op;
    if (!j.is_object())
        throw Error(ErrorCode::SchemaError, context + " must be an object");
    const std::string kind = j.value("op", "none");
    if (kind == "none")
        op.kind = MorphOp::Kind::None;
    else if (kind == "erode")
        op.kind = MorphOp::Kind::Erode;
    else if (kind == "dilate")
        op.kind = MorphOp::Kind::Dilate;
    else
        throw Error(ErrorCode::SchemaError,
                    context + ": op must be none, erode, or dilate, got \"" + kind + "\"");
    op.radius_vox = j.value("radius_vox", 0);
    if (op.radius_vox < 0)
        throw Error(ErrorCode::SchemaError, context + ": radius_vox must be >= 0");
    return op;
}

SliceSpan parse_span(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(ErrorCode::SchemaError, context + " must be [lo, hi] fractions");
    SliceSpan s{j[0].get<double>(), j[1].get<double>()};
    if (!(s.lo > 0.0 && s.hi < 1.0 && s.lo < s.hi))
        throw Error(ErrorCode::SchemaError, context + ": need 0 < lo < hi < 1");
    return s;
}

}  // namespace

const std::vector<std::string>& phantom_structure_vocabulary() {
    static const std::vector<std::string> vocab = [] {
        std::vector<std::string> v = gt_structure_names();
        std::set<std::string> seen(v.begin(), v.end());
        for (const auto& name : ts_structure_names())
            if (seen.insert(name).second) v.push_back(name);
        return v;
    }();
    return vocab;
}

PhantomSpec phantom_spec_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("phantom spec: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "phantom spec must be an object");

    PhantomSpec spec;
    if (doc.contains("dims")) {
        const auto& d = doc["dims"];
        if (!d.is_array() || d.size() != 3)
            throw Error(ErrorCode::SchemaError, "dims must be [nx, ny, nz]");
        for (int a = 0; a < 3; ++a) spec.dims[a] = d[a].get<int>();
    }
    if (doc.contains("spacing_mm")) {
        const auto& s = doc["spacing_mm"];
        if (!s.is_array() || s.size() != 3)
            throw Error(ErrorCode::SchemaError, "spacing_mm must be [sx, sy, sz]");
        for (int a = 0; a < 3; ++a) spec.spacing_mm[a] = s[a].get<float>();
    }
    if (doc.contains("patients")) {
        const auto& p = doc["patients"];
        if (p.is_number_integer()) {
            spec.female_count = spec.male_count = p.get<int>();
        } else if (p.is_object()) {
            spec.female_count = p.value("female", spec.female_count);
            spec.male_count = p.value("male", spec.male_count);
        } else {
            throw Error(ErrorCode::SchemaError,
                        "patients must be an integer or {\"female\": n, \"male\": m}");
        }
    }
    spec.sex_size_ratio = doc.value("sex_size_ratio", spec.sex_size_ratio);
    if (doc.contains("error_model")) {
        const auto& e = doc["error_model"];
        if (!e.is_object()) throw Error(ErrorCode::SchemaError, "error_model must be an object");
        if (e.contains("female")) spec.female_error = parse_morph(e["female"], "error_model.female");
        if (e.contains("male")) spec.male_error = parse_morph(e["male"], "error_model.male");
        if (e.contains("seed")) spec.seed = e["seed"].get<std::uint64_t>();
    }
    if (doc.contains("landmark_spans")) {
        const auto& l = doc["landmark_spans"];
        if (!l.is_object())
            throw Error(ErrorCode::SchemaError, "landmark_spans must be an object");
        if (l.contains("vertebra_T1")) spec.t1_span = parse_span(l["vertebra_T1"], "vertebra_T1");
        if (l.contains("stomach")) spec.stomach_span = parse_span(l["stomach"], "stomach");
        if (l.contains("vertebra_L4")) spec.l4_span = parse_span(l["vertebra_L4"], "vertebra_L4");
    }

    for (int a = 0; a < 3; ++a) {
        if (spec.dims[a] < 32 || spec.dims[a] > 1024)
            throw Error(ErrorCode::SchemaError,
                        "dims must be within [32, 1024] per axis for landmark separability");
        if (!(spec.spacing_mm[a] > 0.0f))
            throw Error(ErrorCode::SchemaError, "spacing_mm must be positive");
    }
    if (spec.female_count < 0 || spec.male_count < 0)
        throw Error(ErrorCode::SchemaError, "patient counts must be >= 0");
    if (!(spec.sex_size_ratio > 0.0))
        throw Error(ErrorCode::SchemaError, "sex_size_ratio must be > 0");
    if (!(spec.t1_span.lo > spec.stomach_span.hi) || !(spec.stomach_span.lo > spec.l4_span.hi))
        throw Error(ErrorCode::SchemaError,
                    "landmark spans must be monotone: vertebra_T1 above stomach above vertebra_L4");
    return spec;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open phantom spec " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return phantom_spec_from_json(text);
}

LabelMap dilate(const LabelMap& mask, int radius_vox) {
    if (radius_vox <= 0) return mask;
    std::vector<double> d(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        d[i] = mask.data[i] > 0 ? 0.0 : std::numeric_limits<double>::infinity();
    detail::edt_squared(d, mask.header.dims, {1.0, 1.0, 1.0});
    LabelMap out = mask;
    const double r2 = static_cast<double>(radius_vox) * radius_vox;
    for (std::size_t i = 0; i < d.size(); ++i) out.data[i] = d[i] <= r2 ? 1 : 0;
    return out;
}

LabelMap erode(const LabelMap& mask, int radius_vox) {
    if (radius_vox <= 0) return mask;
    std::vector<double> d(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        d[i] = mask.data[i] > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    detail::edt_squared(d, mask.header.dims, {1.0, 1.0, 1.0});
    LabelMap out = mask;
    const double r2 = static_cast<double>(radius_vox) * radius_vox;
    for (std::size_t i = 0; i < d.size(); ++i)
        out.data[i] = (mask.data[i] > 0 && d[i] > r2) ? 1 : 0;
    return out;
}

PatientVolumes generate_patient_volumes(const PhantomSpec& spec, Sex sex, int index) {
    const auto& dims = spec.dims;
    const int nz = dims[2];
    SplitMix64 rng{patient_stream_seed(spec.seed, index)};

    PatientVolumes pv;
    pv.ct = Volume3D::zeros(dims, spec.spacing_mm);
    // smooth intensity ramp along z; organs overwrite with their constant
    for (int z = 0; z < nz; ++z) {
        const double base = static_cast<double>(-80 + (160 * z) / (nz - 1));
        const std::size_t slice = static_cast<std::size_t>(dims[0]) * dims[1];
        std::fill_n(pv.ct.data.begin() + static_cast<std::size_t>(z) * slice, slice, base);
    }

    const double ratio = sex == Sex::Female ? spec.sex_size_ratio : 1.0;
    auto radius8 = [&](double frac, int dim, bool scaled) {
        return std::llround(frac * static_cast<double>(dim) * 8.0 * (scaled ? ratio : 1.0));
    };
    auto center8 = [&](double frac, int dim) {
        return std::llround(frac * static_cast<double>(dim) * 8.0);
    };

    for (const auto& organ : kOrgans) {
        // fixed draw order keeps the stream aligned across organs
        const int jx = rng.in_range(-8, 8);
        const int jy = rng.in_range(-8, 8);
        const int jz = rng.in_range(-8, 8);
        const int jrx = rng.in_range(-3, 3);
        const int jry = rng.in_range(-3, 3);
        const int jrz = rng.in_range(-3, 3);

        Ellipsoid8 e;
        e.cx = center8(organ.cx, dims[0]) + jx;
        e.cy = center8(organ.cy, dims[1]) + jy;
        e.rx = radius8(organ.rx, dims[0], true) + jrx;
        e.ry = radius8(organ.ry, dims[1], true) + jry;
        if (organ.is_landmark) {
            const SliceSpan span = std::string_view(organ.name) == "stomach" ? spec.stomach_span
                                   : std::string_view(organ.name) == "vertebra_t1"
                                       ? spec.t1_span
                                       : spec.l4_span;
            const int z_lo = slice_of(span.lo, nz);
            const int z_hi = slice_of(span.hi, nz);
            e.cz = 8ll * (z_lo + z_hi) / 2 + 4 * ((z_lo + z_hi) % 2);
            e.rz = 8ll * (z_hi - z_lo) / 2 + 4 * ((z_hi - z_lo) % 2) + 2;
        } else {
            e.cz = center8(organ.cz, dims[2]) + jz;
            e.rz = radius8(organ.rz, dims[2], true) + jrz;
        }
        e.rx = std::max<std::int64_t>(e.rx, 4);
        e.ry = std::max<std::int64_t>(e.ry, 4);
        e.rz = std::max<std::int64_t>(e.rz, 4);

        LabelMap mask = LabelMap::zeros(dims, spec.spacing_mm);
        paint_ellipsoid(mask, e);
        if (organ.mirrored) {
            Ellipsoid8 twin = e;
            twin.cx = 8ll * dims[0] - e.cx;
            paint_ellipsoid(mask, twin);
        }

        for (std::size_t i = 0; i < mask.data.size(); ++i)
            if (mask.data[i] > 0) pv.ct.data[i] = static_cast<double>(organ.ct_value);

        const std::string name = organ.name;
        if (name == "vertebra_t1")
            pv.vertebra_t1 = std::move(mask);
        else if (name == "vertebra_l4")
            pv.vertebra_l4 = std::move(mask);
        else
            pv.structures[name] = std::move(mask);
    }

    // CTV: a vertical tube with region-dependent bulges. The bulge profile
    // follows the landmark span template so it lines up with the region split.
    const int jcx = rng.in_range(-8, 8);
    const int jcy = rng.in_range(-8, 8);
    const int jr = rng.in_range(-4, 4);
    const std::int64_t tube_cx = center8(0.50, dims[0]) + jcx;
    const std::int64_t tube_cy = center8(0.47, dims[1]) + jcy;
    const std::int64_t base_r = std::max<std::int64_t>(radius8(0.07, dims[0], false) + jr, 24);
    const int z_start = slice_of(0.04, nz);
    const int z_end = slice_of(0.96, nz);
    const int z_t1_top = slice_of(spec.t1_span.hi, nz);
    const int z_stomach_top = slice_of(spec.stomach_span.hi, nz);
    const int z_l4_bottom = slice_of(spec.l4_span.lo, nz);

    pv.gt_ctv = LabelMap::zeros(dims, spec.spacing_mm);
    for (int z = z_start; z <= z_end; ++z) {
        std::int64_t num = 8;  // HN
        if (z <= z_t1_top) num = 11;        // THX
        if (z <= z_stomach_top) num = 14;   // ABDM
        if (z < z_l4_bottom) num = 10;      // PELV
        const std::int64_t r = (base_r * num) / 8;
        const std::int64_t r2 = r * r;
        const int x0 = std::max<int>(0, static_cast<int>((tube_cx - r) / 8) - 1);
        const int x1 = std::min<int>(dims[0] - 1, static_cast<int>((tube_cx + r) / 8) + 1);
        const int y0 = std::max<int>(0, static_cast<int>((tube_cy - r) / 8) - 1);
        const int y1 = std::min<int>(dims[1] - 1, static_cast<int>((tube_cy + r) / 8) + 1);
        for (int y = y0; y <= y1; ++y) {
            const std::int64_t dy = 8ll * y - tube_cy;
            for (int x = x0; x <= x1; ++x) {
                const std::int64_t dx = 8ll * x - tube_cx;
                if (dx * dx + dy * dy <= r2) pv.gt_ctv.at(x, y, z) = 1;
            }
        }
    }

    const MorphOp& op = sex == Sex::Female ? spec.female_error : spec.male_error;
    switch (op.kind) {
        case MorphOp::Kind::None: pv.pred_ctv = pv.gt_ctv; break;
        case MorphOp::Kind::Erode: pv.pred_ctv = erode(pv.gt_ctv, op.radius_vox); break;
        case MorphOp::Kind::Dilate: pv.pred_ctv = dilate(pv.gt_ctv, op.radius_vox); break;
    }
    return pv;
}

namespace {

std::string patient_id_for(Sex sex, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%c%03d", sex == Sex::Female ? 'f' : 'm', index);
    return buf;
}

}  // namespace

PatientRecord generate_patient(const PhantomSpec& spec, Sex sex, int index,
                               const std::filesystem::path& out_dir) {
    const std::string pid = patient_id_for(sex, index);
    const auto dir = out_dir / pid;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());

    PatientVolumes pv = generate_patient_volumes(spec, sex, index);

    PatientRecord r;
    r.patient_id = pid;
    r.sex = sex;
    r.ct_path = dir / "ct.nii.gz";
    write_volume(pv.ct, r.ct_path, Datatype::Int16);
    r.gt_ctv_path = dir / "gt_ctv.nii.gz";
    write_labelmap(pv.gt_ctv, r.gt_ctv_path);
    r.pred_ctv_path = dir / "pred_ctv.nii.gz";
    write_labelmap(pv.pred_ctv, *r.pred_ctv_path);
    for (const auto& [name, mask] : pv.structures) {
        const auto p = dir / (name + ".nii.gz");
        write_labelmap(mask, p);
        r.structure_paths[name] = p;
    }
    const auto t1_path = dir / "vertebra_t1.nii.gz";
    const auto l4_path = dir / "vertebra_l4.nii.gz";
    write_labelmap(pv.vertebra_t1, t1_path);
    write_labelmap(pv.vertebra_l4, l4_path);
    r.landmark_paths[Landmark::VertebraT1] = t1_path;
    r.landmark_paths[Landmark::Stomach] = r.structure_paths.at("stomach");
    r.landmark_paths[Landmark::VertebraL4] = l4_path;
    return r;
}

CohortManifest generate_cohort(const PhantomSpec& spec, const std::filesystem::path& out_dir,
                               int threads) {
    struct Job {
        Sex sex;
        int index;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < spec.female_count; ++i) jobs.push_back({Sex::Female, i});
    for (int i = 0; i < spec.male_count; ++i) jobs.push_back({Sex::Male, i});

    std::vector<PatientRecord> records(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        records[j] = generate_patient(spec, jobs[j].sex, jobs[j].index, out_dir);
    });

    CohortManifest manifest;
    manifest.structure_vocabulary = phantom_structure_vocabulary();
    manifest.records = std::move(records);
    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const PatientRecord& a, const PatientRecord& b) {
                  return a.patient_id < b.patient_id;
              });
    write_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

}  // namespace priorseg
