#pragma once

#include <array>
#include <string_view>

#include "priorseg/nifti_io.hpp"

namespace priorseg {

enum class Region { HN, THX, ABDM, PELV };
constexpr std::array<Region, 4> kRegions{Region::HN, Region::THX, Region::ABDM, Region::PELV};
const char* to_string(Region r);
Region region_from_string(std::string_view s);

// Axial split of the slice range. b1/b2/b3 are slice indices in "normalized"
// orientation (larger index = more superior): b1 is the top slice of
// vertebra T1, b2 the top slice of the stomach, b3 the bottom slice of
// vertebra L4. Regions are half-open in normalized space:
//   HN = [b1+1, n), THX = [b2+1, b1+1), ABDM = [b3, b2+1), PELV = [0, b3).
struct RegionBounds {
    int b1 = 0;
    int b2 = 0;
    int b3 = 0;
    int n_slices = 0;
    bool plus_z_superior = true;

    struct Interval {
        int lo;
        int hi;  // half-open [lo, hi), normalized orientation
    };
    Interval interval(Region r) const;

    // Membership test for a raw slice index of the underlying grid.
    bool contains(Region r, int z_raw) const;
};

struct LandmarkSet {
    LabelMap vertebra_t1;
    LabelMap stomach;
    LabelMap vertebra_l4;
};

// Derives the region split from the landmark masks. `plus_z_superior` states
// which end of the z axis is the patient's head.
RegionBounds compute_bounds(const LandmarkSet& landmarks, bool plus_z_superior = true);

// Zeroes every voxel outside the region's slice interval; grid shape is kept
// so metrics stay on the common grid.
LabelMap crop_to_region(const LabelMap& mask, const RegionBounds& bounds, Region region);

}  // namespace priorseg
