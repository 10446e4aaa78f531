#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "priorseg/cohort.hpp"

namespace priorseg {

enum class ReportRegion { HN, THX, ABDM, PELV, Whole };
constexpr std::array<ReportRegion, 5> kReportRegions{
    ReportRegion::HN, ReportRegion::THX, ReportRegion::ABDM, ReportRegion::PELV,
    ReportRegion::Whole};
const char* to_string(ReportRegion r);
ReportRegion report_region_from_string(std::string_view s);

struct ScoreSample {
    std::string patient_id;
    Sex sex = Sex::Female;
    ReportRegion region = ReportRegion::Whole;
    double dsc = 0.0;
    std::optional<double> hd95_mm;
};

struct Quartiles {
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
};

// Linear-interpolation quartiles (rank = q*(n-1) on the sorted list).
Quartiles quartiles(std::vector<double> values);

// Signed gender gaps, male minus female.
double agd(std::span<const ScoreSample> samples, ReportRegion region);
double mgd(std::span<const ScoreSample> samples, ReportRegion region);
// max(Q3_male - Q1_female, Q3_female - Q1_male): quartile overlap, symmetric
// under group swap.
double qd(std::span<const ScoreSample> samples, ReportRegion region);

struct GroupStats {
    std::size_t n = 0;
    double mean = 0.0;
    Quartiles q;
};

struct GapBlock {
    double agd = 0.0;
    double mgd = 0.0;
    double qd = 0.0;
    GroupStats female;
    GroupStats male;
};

struct RegionFairness {
    ReportRegion region = ReportRegion::Whole;
    std::size_t n_samples = 0;
    double dsc_median_all = 0.0;            // pooled over both sexes
    std::optional<double> hd95_median_all;  // pooled; absent unless defined for every sample
    std::optional<GapBlock> dsc;      // absent when a sex group is empty
    std::optional<GapBlock> hd95_mm;  // absent unless HD95 defined for every sample
    std::vector<std::string> flags;
};

struct FairnessSummary {
    std::vector<RegionFairness> regions;  // ordered HN, THX, ABDM, PELV, WHOLE
};

// Aggregates samples region by region. A region with an empty sex group is
// flagged, not fatal; other regions still compute.
FairnessSummary summarize(std::span<const ScoreSample> samples);

}  // namespace priorseg
