#pragma once

#include <span>

namespace priorseg {

// Linear-interpolation quantile on an already-sorted list: rank r = q * (n-1),
// zero-based, value = v[floor(r)] + frac(r) * (v[floor(r)+1] - v[floor(r)]).
// The same rule backs both HD percentiles (q = p/100) and fairness quartiles.
double quantile_sorted(std::span<const double> sorted, double q);

// Convenience wrapper for p in (0, 100].
double percentile_sorted(std::span<const double> sorted, double p);

}  // namespace priorseg
