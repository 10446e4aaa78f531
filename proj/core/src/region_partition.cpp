#include "priorseg/region_partition.hpp"

#include <algorithm>
#include <string>

namespace priorseg {

const char* to_string(Region r) {
    switch (r) {
        case Region::HN: return "HN";
        case Region::THX: return "THX";
        case Region::ABDM: return "ABDM";
        case Region::PELV: return "PELV";
    }
    return "?";
}

Region region_from_string(std::string_view s) {
    if (s == "HN") return Region::HN;
    if (s == "THX") return Region::THX;
    if (s == "ABDM") return Region::ABDM;
    if (s == "PELV") return Region::PELV;
    throw Error(ErrorCode::SchemaError, "unknown region \"" + std::string(s) + "\"");
}

RegionBounds::Interval RegionBounds::interval(Region r) const {
    switch (r) {
        case Region::HN: return {b1 + 1, n_slices};
        case Region::THX: return {b2 + 1, b1 + 1};
        case Region::ABDM: return {b3, b2 + 1};
        case Region::PELV: return {0, b3};
    }
    return {0, 0};
}

bool RegionBounds::contains(Region r, int z_raw) const {
    const int z = plus_z_superior ? z_raw : n_slices - 1 - z_raw;
    const Interval iv = interval(r);
    return z >= iv.lo && z < iv.hi;
}

namespace {

// Most-superior (want_top) or most-inferior occupied slice, in normalized
// orientation. Throws EmptyLandmark when the mask has no foreground.
int occupied_extreme(const LabelMap& mask, bool plus_z_superior, bool want_top,
                     const char* name) {
    const int nz = mask.header.dims[2];
    const std::size_t slice_len = static_cast<std::size_t>(mask.header.dims[0]) *
                                  static_cast<std::size_t>(mask.header.dims[1]);
    int lo_raw = -1, hi_raw = -1;
    for (int z = 0; z < nz; ++z) {
        const std::uint8_t* s = mask.data.data() + static_cast<std::size_t>(z) * slice_len;
        const bool occupied = std::any_of(s, s + slice_len, [](std::uint8_t v) { return v > 0; });
        if (!occupied) continue;
        if (lo_raw < 0) lo_raw = z;
        hi_raw = z;
    }
    if (lo_raw < 0)
        throw Error(ErrorCode::EmptyLandmark, std::string(name) + " mask has no foreground");
    const int lo = plus_z_superior ? lo_raw : nz - 1 - hi_raw;
    const int hi = plus_z_superior ? hi_raw : nz - 1 - lo_raw;
    return want_top ? hi : lo;
}

}  // namespace

RegionBounds compute_bounds(const LandmarkSet& landmarks, bool plus_z_superior) {
    check_aligned(landmarks.vertebra_t1.header, landmarks.stomach.header);
    check_aligned(landmarks.vertebra_t1.header, landmarks.vertebra_l4.header);

    RegionBounds b;
    b.n_slices = landmarks.vertebra_t1.header.dims[2];
    b.plus_z_superior = plus_z_superior;
    b.b1 = occupied_extreme(landmarks.vertebra_t1, plus_z_superior, true, "vertebra_T1");
    b.b2 = occupied_extreme(landmarks.stomach, plus_z_superior, true, "stomach");
    b.b3 = occupied_extreme(landmarks.vertebra_l4, plus_z_superior, false, "vertebra_L4");

    if (b.b1 < b.b2 || b.b2 < b.b3)
        throw Error(ErrorCode::NonMonotonicLandmarks,
                    "expected vertebra_T1 above stomach above vertebra_L4, got slices b1=" +
                        std::to_string(b.b1) + ", b2=" + std::to_string(b.b2) +
                        ", b3=" + std::to_string(b.b3));
    return b;
}

LabelMap crop_to_region(const LabelMap& mask, const RegionBounds& bounds, Region region) {
    if (mask.header.dims[2] != bounds.n_slices)
        throw Error(ErrorCode::GridMismatch,
                    "mask has " + std::to_string(mask.header.dims[2]) + " slices, bounds have " +
                        std::to_string(bounds.n_slices));

    LabelMap out = mask;
    const std::size_t slice_len = static_cast<std::size_t>(mask.header.dims[0]) *
                                  static_cast<std::size_t>(mask.header.dims[1]);
    for (int z = 0; z < bounds.n_slices; ++z) {
        if (bounds.contains(region, z)) continue;
        auto* s = out.data.data() + static_cast<std::size_t>(z) * slice_len;
        std::fill(s, s + slice_len, std::uint8_t{0});
    }
    return out;
}

}  // namespace priorseg
