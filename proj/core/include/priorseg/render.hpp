#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "priorseg/nifti_io.hpp"

namespace priorseg {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<std::uint8_t, 3>> pixels;  // row-major
};

// Axial slice as windowed grayscale (window = slice min/max) with the mask
// contours drawn in up to three fixed colors. Deterministic for fixed inputs.
RgbImage render_slice_overlay(const Volume3D& ct, std::span<const LabelMap> masks, int slice_z);

// Binary portable pixmap (P6).
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> ppm_bytes(const RgbImage& image);

}  // namespace priorseg
