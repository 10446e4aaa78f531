#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "priorseg/nifti_io.hpp"

namespace priorseg {

// 6-connectivity boundary voxels of a mask: foreground voxels with at least
// one face neighbor that is background or outside the grid.
struct SurfaceSet {
    std::vector<std::array<int, 3>> voxels;
    std::array<float, 3> spacing_mm{1.0f, 1.0f, 1.0f};
};

struct MetricResult {
    double dsc = 0.0;
    std::optional<double> hd_mm;    // percentile 100
    std::optional<double> hd95_mm;  // configured percentile (default 95)
    std::array<std::size_t, 3> voxel_counts{0, 0, 0};  // |X|, |Y|, |X n Y|
};

// 2|XnY| / (|X|+|Y|); both empty -> 1.0, exactly one empty -> 0.0.
double dice(const LabelMap& gt, const LabelMap& pred);

SurfaceSet extract_surface(const LabelMap& mask);

// Exact anisotropic Euclidean distance transform: per voxel, distance in mm to
// the nearest foreground voxel center. All-background input gives +infinity
// everywhere.
Volume3D edt(const LabelMap& mask);

// Directed percentile Hausdorff distance: the percentile is taken per
// direction over the surface-to-surface distance multiset and the two
// directed values are combined with max. percentile 100 is the classic HD.
// Throws EmptyMask when either mask has no foreground.
double hausdorff(const LabelMap& gt, const LabelMap& pred, double percentile);

// DSC + HD (percentile 100) + percentile HD in one pass over shared distance
// multisets. HD fields stay unset when either mask is empty.
MetricResult evaluate_pair(const LabelMap& gt, const LabelMap& pred, double percentile = 95.0);

namespace detail {

// Squared-distance transform over an arbitrary box, in place. `d` holds 0 at
// seed voxels and +infinity elsewhere; on return it holds squared mm
// distances. `axis_weight_sq` is the squared per-axis step in mm.
void edt_squared(std::vector<double>& d, const std::array<int, 3>& dims,
                 const std::array<double, 3>& axis_weight_sq);

// Distances in mm from every voxel of `from` to the nearest voxel of `to`,
// in the order of `from.voxels`. Grid-size independent: works on the joint
// bounding box of the two voxel sets.
std::vector<double> surface_distances(const SurfaceSet& from, const SurfaceSet& to);

}  // namespace detail

}  // namespace priorseg
