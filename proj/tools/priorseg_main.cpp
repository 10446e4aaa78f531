// priorseg: encode anatomical-prior channels, evaluate CTV predictions with
// DSC/HD95 per body region, audit gender gaps, generate synthetic phantom
// cohorts, and render slice overlays.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "priorseg/cohort.hpp"
#include "priorseg/conventions.hpp"
#include "priorseg/fairness_stats.hpp"
#include "priorseg/nifti_io.hpp"
#include "priorseg/parallel.hpp"
#include "priorseg/phantom_gen.hpp"
#include "priorseg/prior_encoding.hpp"
#include "priorseg/region_partition.hpp"
#include "priorseg/render.hpp"
#include "priorseg/report.hpp"
#include "priorseg/surface_metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace priorseg;

namespace {

struct ItemError {
    std::string patient_id;
    std::string code;
    std::string message;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

// Collected per-item failures land in errors.json; the command keeps going so
// one corrupt file cannot take down a whole cohort run.
int flush_errors(std::vector<std::optional<ItemError>>& slots, const fs::path& out_dir,
                 const char* command) {
    std::vector<ItemError> errors;
    for (auto& s : slots)
        if (s) errors.push_back(std::move(*s));
    if (errors.empty()) return 0;

    ordered_json doc;
    doc["command"] = command;
    doc["errors"] = ordered_json::array();
    for (const auto& e : errors) {
        doc["errors"].push_back(
            {{"patient_id", e.patient_id}, {"code", e.code}, {"message", e.message}});
        std::fprintf(stderr, "%s: patient %s failed: %s\n", command, e.patient_id.c_str(),
                     e.message.c_str());
    }
    write_text(out_dir / "errors.json", doc.dump(2) + "\n");
    return 1;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
}

ReportRegion report_region_of(Region r) {
    switch (r) {
        case Region::HN: return ReportRegion::HN;
        case Region::THX: return ReportRegion::THX;
        case Region::ABDM: return ReportRegion::ABDM;
        case Region::PELV: return ReportRegion::PELV;
    }
    return ReportRegion::Whole;
}

int cmd_encode(const fs::path& manifest_path, const std::string& strategy_id, const fs::path& out,
               int threads) {
    const CohortManifest manifest = load_manifest(manifest_path);
    const EncodingStrategy strategy =
        make_strategy(strategy_from_string(strategy_id), manifest.structure_vocabulary);
    ensure_dir(out);

    const std::size_t n = manifest.records.size();
    std::vector<std::optional<ItemError>> errors(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const PatientRecord& rec = manifest.records[i];
        try {
            const EncodedChannels enc = encode(strategy, rec);
            write_encoded(enc, rec.patient_id, out / rec.patient_id);
        } catch (const Error& e) {
            errors[i] = ItemError{rec.patient_id, to_string(e.code()), e.what()};
        } catch (const std::exception& e) {
            errors[i] = ItemError{rec.patient_id, "Unexpected", e.what()};
        }
    });

    const int rc = flush_errors(errors, out, "encode");
    std::size_t failed = 0;
    for (const auto& e : errors) failed += e.has_value();
    std::printf("encode %s: %zu/%zu patients ok\n", strategy_id.c_str(), n - failed, n);
    return rc;
}

int cmd_evaluate(const fs::path& manifest_path, const fs::path& out, int threads, bool regions,
                 double percentile) {
    const CohortManifest manifest = load_manifest(manifest_path);
    ensure_dir(out);

    struct PatientResult {
        std::vector<MetricRow> rows;
        std::optional<RegionBounds> bounds;
    };
    const std::size_t n = manifest.records.size();
    std::vector<PatientResult> results(n);
    std::vector<std::optional<ItemError>> errors(n);

    parallel_for(n, threads, [&](std::size_t i) {
        const PatientRecord& rec = manifest.records[i];
        try {
            if (!rec.pred_ctv_path)
                throw Error(ErrorCode::MissingFile,
                            "patient \"" + rec.patient_id + "\" has no pred_ctv path");
            const LabelMap gt = read_labelmap(rec.gt_ctv_path);
            const LabelMap pred = read_labelmap(*rec.pred_ctv_path);

            auto row_of = [&](ReportRegion region, const MetricResult& m) {
                return MetricRow{rec.patient_id, rec.sex, region, m.dsc, m.hd_mm, m.hd95_mm};
            };
            PatientResult pr;
            pr.rows.push_back(row_of(ReportRegion::Whole, evaluate_pair(gt, pred, percentile)));

            if (regions) {
                LandmarkSet lms{read_labelmap(rec.landmark_paths.at(Landmark::VertebraT1)),
                                read_labelmap(rec.landmark_paths.at(Landmark::Stomach)),
                                read_labelmap(rec.landmark_paths.at(Landmark::VertebraL4))};
                check_aligned(gt.header, lms.vertebra_t1.header);
                const RegionBounds bounds = compute_bounds(lms, manifest.superior_is_plus_z);
                pr.bounds = bounds;
                for (Region r : kRegions) {
                    const LabelMap gt_r = crop_to_region(gt, bounds, r);
                    const LabelMap pred_r = crop_to_region(pred, bounds, r);
                    pr.rows.push_back(
                        row_of(report_region_of(r), evaluate_pair(gt_r, pred_r, percentile)));
                }
            }
            results[i] = std::move(pr);
        } catch (const Error& e) {
            errors[i] = ItemError{rec.patient_id, to_string(e.code()), e.what()};
        } catch (const std::exception& e) {
            errors[i] = ItemError{rec.patient_id, "Unexpected", e.what()};
        }
    });

    std::vector<MetricRow> rows;
    ordered_json bounds_doc = ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) continue;
        rows.insert(rows.end(), results[i].rows.begin(), results[i].rows.end());
        if (results[i].bounds) {
            const RegionBounds& b = *results[i].bounds;
            bounds_doc.push_back({{"patient_id", manifest.records[i].patient_id},
                                  {"b1", b.b1},
                                  {"b2", b.b2},
                                  {"b3", b.b3},
                                  {"n_slices", b.n_slices}});
        }
    }
    write_metrics_csv(out / "metrics.csv", rows);
    if (regions) write_text(out / "bounds.json", bounds_doc.dump(2) + "\n");

    std::size_t failed = 0;
    for (const auto& e : errors) failed += e.has_value();
    ordered_json meta;
    meta["manifest"] = manifest_path.string();
    meta["percentile"] = percentile;
    meta["regions"] = regions;
    meta["superior_is_plus_z"] = manifest.superior_is_plus_z;
    meta["n_patients"] = n;
    meta["n_failed"] = failed;
    meta["conventions"] = convention_notes();
    write_text(out / "evaluation_metadata.json", meta.dump(2) + "\n");

    const int rc = flush_errors(errors, out, "evaluate");
    std::printf("evaluate: %zu/%zu patients ok, %zu metric rows\n", n - failed, n, rows.size());
    return rc;
}

int cmd_fairness(const fs::path& metrics_path, const fs::path& out, const std::string& label) {
    const auto rows = read_metrics_csv(metrics_path);
    const auto samples = samples_from_rows(rows);
    const FairnessSummary summary = summarize(samples);
    ensure_dir(out);
    write_text(out / "fairness.json", fairness_json(summary, label));
    write_text(out / "tables.md", fairness_tables_markdown(summary, label));

    bool empty_group = false;
    for (const auto& r : summary.regions)
        for (const auto& f : r.flags)
            if (f.rfind("empty_group", 0) == 0) {
                std::fprintf(stderr, "fairness: region %s flagged: %s\n", to_string(r.region),
                             f.c_str());
                empty_group = true;
            }
    std::printf("fairness: %zu regions summarized\n", summary.regions.size());
    return empty_group ? 1 : 0;
}

int cmd_render(const fs::path& ct_path, const std::vector<fs::path>& mask_paths, int slice,
               const fs::path& out) {
    const Volume3D ct = read_volume(ct_path);
    std::vector<LabelMap> masks;
    masks.reserve(mask_paths.size());
    for (const auto& p : mask_paths) masks.push_back(read_labelmap(p));
    const RgbImage img = render_slice_overlay(ct, masks, slice);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_ppm(img, out);
    std::printf("render: wrote %s (%dx%d)\n", out.string().c_str(), img.width, img.height);
    return 0;
}

int cmd_phantom(const std::optional<fs::path>& spec_path, const fs::path& out,
                std::optional<std::uint64_t> seed, int threads) {
    PhantomSpec spec = spec_path ? load_phantom_spec(*spec_path) : PhantomSpec{};
    if (seed) spec.seed = *seed;
    ensure_dir(out);
    const CohortManifest manifest = generate_cohort(spec, out, threads);
    if (manifest.records.empty())
        std::fprintf(stderr, "phantom: warning: cohort is empty (0 patients requested)\n");
    std::printf("%s\n", (out / "manifest.json").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anatomical-prior encoding, CTV evaluation, and gender-gap reporting"};
    app.require_subcommand(1);

    std::string manifest, strategy, label = "run";
    std::string out_dir, metrics_file, ct_file, out_file, spec_file;
    std::vector<std::string> mask_files;
    int threads = default_thread_count();
    double percentile = 95.0;
    bool regions = false;
    int slice = 0;
    std::uint64_t seed = 0;

    auto* encode_cmd = app.add_subcommand("encode", "write prior channels for a cohort");
    encode_cmd->add_option("--manifest", manifest, "cohort manifest JSON")->required();
    encode_cmd->add_option("--strategy", strategy, "mi-z, eq-z, crop-z, mi, or mi-ts")
        ->required()
        ->check(CLI::IsMember({"mi-z", "eq-z", "crop-z", "mi", "mi-ts"}));
    encode_cmd->add_option("--out", out_dir, "output directory")->required();
    encode_cmd->add_option("--threads", threads, "worker threads");

    auto* eval_cmd = app.add_subcommand("evaluate", "DSC/HD metrics per patient");
    eval_cmd->add_option("--manifest", manifest, "cohort manifest JSON")->required();
    eval_cmd->add_option("--out", out_dir, "output directory")->required();
    eval_cmd->add_option("--threads", threads, "worker threads");
    eval_cmd->add_flag("--regions", regions, "also evaluate per body region");
    eval_cmd->add_option("--percentile", percentile, "HD percentile (default 95)")
        ->check(CLI::Range(1e-9, 100.0));

    auto* fair_cmd = app.add_subcommand("fairness", "gender-gap summary from metrics.csv");
    fair_cmd->add_option("--metrics", metrics_file, "metrics.csv from evaluate")->required();
    fair_cmd->add_option("--out", out_dir, "output directory")->required();
    fair_cmd->add_option("--label", label, "run label used in the tables");

    auto* render_cmd = app.add_subcommand("render", "axial slice overlay image (PPM)");
    render_cmd->add_option("--ct", ct_file, "CT volume")->required();
    render_cmd->add_option("--mask", mask_files, "mask overlay (up to 3)")->expected(0, 3);
    render_cmd->add_option("--slice", slice, "axial slice index")->required();
    render_cmd->add_option("--out", out_file, "output .ppm path")->required();

    auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic cohort");
    auto* spec_opt = phantom_cmd->add_option("--spec", spec_file, "phantom spec JSON");
    phantom_cmd->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = phantom_cmd->add_option("--seed", seed, "override the spec seed");
    phantom_cmd->add_option("--threads", threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*encode_cmd) return cmd_encode(manifest, strategy, out_dir, threads);
        if (*eval_cmd) return cmd_evaluate(manifest, out_dir, threads, regions, percentile);
        if (*fair_cmd) return cmd_fairness(metrics_file, out_dir, label);
        if (*render_cmd) {
            std::vector<fs::path> masks(mask_files.begin(), mask_files.end());
            return cmd_render(ct_file, masks, slice, out_file);
        }
        if (*phantom_cmd) {
            std::optional<fs::path> spec;
            if (*spec_opt) spec = fs::path(spec_file);
            std::optional<std::uint64_t> seed_override;
            if (*seed_opt) seed_override = seed;
            return cmd_phantom(spec, out_dir, seed_override, threads);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
