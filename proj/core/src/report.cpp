#include "priorseg/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "priorseg/conventions.hpp"

namespace priorseg {

using nlohmann::ordered_json;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string pct2(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

std::string mm2(double mm) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", mm);
    return buf;
}

// Magnitude plus direction marker; the sign convention (male - female) stays
// in the JSON output.
std::string signed_pct(double fraction) {
    if (fraction == 0.0) return pct2(0.0);
    std::string s = pct2(std::abs(fraction));
    s += fraction > 0.0 ? " (M>F)" : " (F>M)";
    return s;
}

std::string signed_mm(double mm) {
    if (mm == 0.0) return mm2(0.0);
    std::string s = mm2(std::abs(mm));
    s += mm > 0.0 ? " (M>F)" : " (F>M)";
    return s;
}

double parse_double(std::string_view field, std::size_t line_no, const char* what) {
    double value = 0.0;
    const auto rc = std::from_chars(field.data(), field.data() + field.size(), value);
    if (rc.ec != std::errc() || rc.ptr != field.data() + field.size())
        throw Error(ErrorCode::SchemaError, "metrics csv line " + std::to_string(line_no) +
                                                ": bad " + what + " value \"" +
                                                std::string(field) + "\"");
    return value;
}

}  // namespace

std::string metrics_csv(std::span<const MetricRow> rows) {
    std::string out = "patient_id,sex,region,dsc,hd_mm,hd95_mm\n";
    for (const auto& r : rows) {
        out += r.patient_id;
        out += ',';
        out += to_string(r.sex);
        out += ',';
        out += to_string(r.region);
        out += ',';
        out += fixed6(r.dsc);
        out += ',';
        if (r.hd_mm) out += fixed6(*r.hd_mm);
        out += ',';
        if (r.hd95_mm) out += fixed6(*r.hd95_mm);
        out += '\n';
    }
    return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << metrics_csv(rows);
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
    std::vector<MetricRow> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (line_no == 1) {
            if (line != "patient_id,sex,region,dsc,hd_mm,hd95_mm")
                throw Error(ErrorCode::SchemaError, "metrics csv: unexpected header \"" + line + "\"");
            continue;
        }
        if (fields.size() != 6)
            throw Error(ErrorCode::SchemaError, "metrics csv line " + std::to_string(line_no) +
                                                    ": expected 6 fields, got " +
                                                    std::to_string(fields.size()));
        MetricRow r;
        r.patient_id = fields[0];
        r.sex = sex_from_string(fields[1]);
        r.region = report_region_from_string(fields[2]);
        r.dsc = parse_double(fields[3], line_no, "dsc");
        if (!fields[4].empty()) r.hd_mm = parse_double(fields[4], line_no, "hd_mm");
        if (!fields[5].empty()) r.hd95_mm = parse_double(fields[5], line_no, "hd95_mm");
        rows.push_back(std::move(r));
    }
    if (line_no == 0) throw Error(ErrorCode::SchemaError, "metrics csv: empty file");
    return rows;
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_metrics_csv(text);
}

std::vector<ScoreSample> samples_from_rows(std::span<const MetricRow> rows) {
    std::vector<ScoreSample> samples;
    samples.reserve(rows.size());
    for (const auto& r : rows)
        samples.push_back({r.patient_id, r.sex, r.region, r.dsc, r.hd95_mm});
    return samples;
}

namespace {

ordered_json group_json(const GroupStats& g) {
    return ordered_json{{"n", g.n},        {"mean", g.mean},     {"q1", g.q.q1},
                        {"median", g.q.q2}, {"q3", g.q.q3}};
}

ordered_json gap_json(const GapBlock& g) {
    return ordered_json{{"agd", g.agd},
                        {"mgd", g.mgd},
                        {"qd", g.qd},
                        {"female", group_json(g.female)},
                        {"male", group_json(g.male)}};
}

}  // namespace

std::string fairness_json(const FairnessSummary& summary, const std::string& label) {
    ordered_json doc;
    doc["label"] = label;
    doc["conventions"] = convention_notes();
    doc["regions"] = ordered_json::array();
    for (const auto& r : summary.regions) {
        ordered_json jr;
        jr["region"] = to_string(r.region);
        jr["n_samples"] = r.n_samples;
        jr["dsc_median"] = r.dsc_median_all;
        if (r.hd95_median_all)
            jr["hd95_median_mm"] = *r.hd95_median_all;
        else
            jr["hd95_median_mm"] = nullptr;
        jr["dsc"] = r.dsc ? gap_json(*r.dsc) : ordered_json(nullptr);
        jr["hd95_mm"] = r.hd95_mm ? gap_json(*r.hd95_mm) : ordered_json(nullptr);
        jr["flags"] = r.flags;
        doc["regions"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

std::string fairness_tables_markdown(const FairnessSummary& summary, const std::string& label) {
    const RegionFairness* whole = nullptr;
    std::array<const RegionFairness*, 4> body{};  // HN, THX, ABDM, PELV
    for (const auto& r : summary.regions) {
        switch (r.region) {
            case ReportRegion::HN: body[0] = &r; break;
            case ReportRegion::THX: body[1] = &r; break;
            case ReportRegion::ABDM: body[2] = &r; break;
            case ReportRegion::PELV: body[3] = &r; break;
            case ReportRegion::Whole: whole = &r; break;
        }
    }

    std::string md;
    md += "# Whole-body performance and gender gap\n\n";
    md += "| Run | DSC Med. | HD95 Med. (mm) | DSC F-Med. | DSC M-Med. |\n";
    md += "|---|---|---|---|---|\n";
    if (whole) {
        md += "| " + label + " | " + pct2(whole->dsc_median_all) + " | ";
        md += whole->hd95_median_all ? mm2(*whole->hd95_median_all) : "-";
        md += " | ";
        md += whole->dsc ? pct2(whole->dsc->female.q.q2) : "-";
        md += " | ";
        md += whole->dsc ? pct2(whole->dsc->male.q.q2) : "-";
        md += " |\n";
    } else {
        md += "| " + label + " | - | - | - | - |\n";
    }

    md += "\n# Median DSC per region\n\n";
    md += "| Run | Group | HN | THX | ABDM | PELV |\n";
    md += "|---|---|---|---|---|---|\n";
    const char* groups[3] = {"Total", "Female", "Male"};
    for (int g = 0; g < 3; ++g) {
        md += "| " + label + " | " + groups[g] + " |";
        for (const auto* r : body) {
            md += ' ';
            if (!r) {
                md += '-';
            } else if (g == 0) {
                md += pct2(r->dsc_median_all);
            } else if (r->dsc) {
                md += pct2(g == 1 ? r->dsc->female.q.q2 : r->dsc->male.q.q2);
            } else {
                md += '-';
            }
            md += " |";
        }
        md += '\n';
    }

    md += "\n# Fairness metrics per region (DSC)\n\n";
    md += "| Run | Metric | HN | THX | ABDM | PELV |\n";
    md += "|---|---|---|---|---|---|\n";
    const char* metrics[3] = {"AGD", "MGD", "QD"};
    for (int k = 0; k < 3; ++k) {
        md += "| " + label + " | " + metrics[k] + " |";
        for (const auto* r : body) {
            md += ' ';
            if (r && r->dsc) {
                const GapBlock& gb = *r->dsc;
                md += k == 0 ? signed_pct(gb.agd) : k == 1 ? signed_pct(gb.mgd) : pct2(gb.qd);
            } else {
                md += '-';
            }
            md += " |";
        }
        md += '\n';
    }

    if (whole && whole->hd95_mm) {
        md += "\n# Fairness metrics, whole body (HD95 mm)\n\n";
        md += "| Run | AGD | MGD | QD |\n|---|---|---|---|\n";
        const GapBlock& gb = *whole->hd95_mm;
        md += "| " + label + " | " + signed_mm(gb.agd) + " | " + signed_mm(gb.mgd) + " | " +
              mm2(gb.qd) + " |\n";
    }

    md += "\n## Conventions\n\n";
    for (const auto& [key, note] : convention_notes()) md += "- " + key + ": " + note + "\n";

    bool any_flag = false;
    for (const auto& r : summary.regions) any_flag |= !r.flags.empty();
    if (any_flag) {
        md += "\n## Flags\n\n";
        for (const auto& r : summary.regions)
            for (const auto& f : r.flags)
                md += std::string("- ") + to_string(r.region) + ": " + f + "\n";
    }
    return md;
}

}  // namespace priorseg
