#include "priorseg/percentile.hpp"

#include <cmath>
#include <cstddef>

#include "priorseg/error.hpp"

namespace priorseg {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::EmptyGroup, "quantile of an empty list");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double percentile_sorted(std::span<const double> sorted, double p) {
    return quantile_sorted(sorted, p / 100.0);
}

}  // namespace priorseg
