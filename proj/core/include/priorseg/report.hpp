#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "priorseg/fairness_stats.hpp"

namespace priorseg {

// One metrics.csv row: patient_id,sex,region,dsc,hd_mm,hd95_mm with empty
// cells for undefined HD.
struct MetricRow {
    std::string patient_id;
    Sex sex = Sex::Female;
    ReportRegion region = ReportRegion::Whole;
    double dsc = 0.0;
    std::optional<double> hd_mm;
    std::optional<double> hd95_mm;
};

std::string metrics_csv(std::span<const MetricRow> rows);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);
std::vector<MetricRow> parse_metrics_csv(const std::string& text);
std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);

std::vector<ScoreSample> samples_from_rows(std::span<const MetricRow> rows);

// FairnessSummary as JSON, with the convention block and the run label.
std::string fairness_json(const FairnessSummary& summary, const std::string& label);

// Three markdown tables shaped like a whole-body summary, per-region group
// medians, and per-region AGD/MGD/QD. DSC renders as percent with two
// decimals; AGD/MGD print magnitude with an M>F / F>M direction marker.
std::string fairness_tables_markdown(const FairnessSummary& summary, const std::string& label);

}  // namespace priorseg
