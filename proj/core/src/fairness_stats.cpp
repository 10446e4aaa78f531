#include "priorseg/fairness_stats.hpp"

#include <algorithm>
#include <cmath>

#include "priorseg/percentile.hpp"

namespace priorseg {

const char* to_string(ReportRegion r) {
    switch (r) {
        case ReportRegion::HN: return "HN";
        case ReportRegion::THX: return "THX";
        case ReportRegion::ABDM: return "ABDM";
        case ReportRegion::PELV: return "PELV";
        case ReportRegion::Whole: return "WHOLE";
    }
    return "?";
}

ReportRegion report_region_from_string(std::string_view s) {
    for (ReportRegion r : kReportRegions)
        if (s == to_string(r)) return r;
    throw Error(ErrorCode::SchemaError, "unknown region \"" + std::string(s) + "\"");
}

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyGroup, "quartiles of an empty list");
    std::sort(values.begin(), values.end());
    return Quartiles{quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
                     quantile_sorted(values, 0.75)};
}

namespace {

std::vector<double> dsc_of(std::span<const ScoreSample> samples, ReportRegion region, Sex sex) {
    std::vector<double> out;
    for (const auto& s : samples)
        if (s.region == region && s.sex == sex) out.push_back(s.dsc);
    return out;
}

void require_group(const std::vector<double>& values, Sex sex, ReportRegion region) {
    if (values.empty())
        throw Error(ErrorCode::EmptyGroup, std::string("no ") + to_string(sex) +
                                               " samples in region " + to_string(region));
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

double agd(std::span<const ScoreSample> samples, ReportRegion region) {
    auto f = dsc_of(samples, region, Sex::Female);
    auto m = dsc_of(samples, region, Sex::Male);
    require_group(f, Sex::Female, region);
    require_group(m, Sex::Male, region);
    return mean_of(m) - mean_of(f);
}

double mgd(std::span<const ScoreSample> samples, ReportRegion region) {
    auto f = dsc_of(samples, region, Sex::Female);
    auto m = dsc_of(samples, region, Sex::Male);
    require_group(f, Sex::Female, region);
    require_group(m, Sex::Male, region);
    return quartiles(std::move(m)).q2 - quartiles(std::move(f)).q2;
}

double qd(std::span<const ScoreSample> samples, ReportRegion region) {
    auto f = dsc_of(samples, region, Sex::Female);
    auto m = dsc_of(samples, region, Sex::Male);
    require_group(f, Sex::Female, region);
    require_group(m, Sex::Male, region);
    const Quartiles qf = quartiles(std::move(f));
    const Quartiles qm = quartiles(std::move(m));
    return std::max(qm.q3 - qf.q1, qf.q3 - qm.q1);
}

namespace {

GapBlock gap_block(std::vector<double> female, std::vector<double> male) {
    GapBlock g;
    g.female.n = female.size();
    g.male.n = male.size();
    g.female.mean = mean_of(female);
    g.male.mean = mean_of(male);
    g.female.q = quartiles(std::move(female));
    g.male.q = quartiles(std::move(male));
    g.agd = g.male.mean - g.female.mean;
    g.mgd = g.male.q.q2 - g.female.q.q2;
    g.qd = std::max(g.male.q.q3 - g.female.q.q1, g.female.q.q3 - g.male.q.q1);
    return g;
}

}  // namespace

FairnessSummary summarize(std::span<const ScoreSample> samples) {
    FairnessSummary summary;
    for (ReportRegion region : kReportRegions) {
        std::vector<double> dsc_f, dsc_m;
        std::vector<double> hd_f, hd_m;
        std::size_t n_region = 0, n_hd = 0;
        for (const auto& s : samples) {
            if (s.region != region) continue;
            ++n_region;
            (s.sex == Sex::Female ? dsc_f : dsc_m).push_back(s.dsc);
            if (s.hd95_mm) {
                ++n_hd;
                (s.sex == Sex::Female ? hd_f : hd_m).push_back(*s.hd95_mm);
            }
        }
        if (n_region == 0) continue;

        RegionFairness rf;
        rf.region = region;
        rf.n_samples = n_region;
        {
            std::vector<double> pooled = dsc_f;
            pooled.insert(pooled.end(), dsc_m.begin(), dsc_m.end());
            rf.dsc_median_all = quartiles(std::move(pooled)).q2;
        }
        if (n_hd == n_region) {
            std::vector<double> pooled = hd_f;
            pooled.insert(pooled.end(), hd_m.begin(), hd_m.end());
            rf.hd95_median_all = quartiles(std::move(pooled)).q2;
        }
        if (dsc_f.empty() || dsc_m.empty()) {
            if (dsc_f.empty()) rf.flags.push_back("empty_group:female");
            if (dsc_m.empty()) rf.flags.push_back("empty_group:male");
        } else {
            rf.dsc = gap_block(dsc_f, dsc_m);
            if (n_hd == n_region) {
                rf.hd95_mm = gap_block(hd_f, hd_m);
            } else {
                rf.flags.push_back("hd95_undefined_for_" + std::to_string(n_region - n_hd) +
                                   "_of_" + std::to_string(n_region) + "_samples");
            }
        }
        summary.regions.push_back(std::move(rf));
    }
    return summary;
}

}  // namespace priorseg
