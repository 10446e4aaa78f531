#include "priorseg/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace priorseg {

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 3> kContourColors{{
    {255, 64, 64},   // first mask: red
    {64, 255, 64},   // second: green
    {96, 128, 255},  // third: blue
}};

}  // namespace

RgbImage render_slice_overlay(const Volume3D& ct, std::span<const LabelMap> masks, int slice_z) {
    if (masks.size() > kContourColors.size())
        throw Error(ErrorCode::SchemaError,
                    "at most " + std::to_string(kContourColors.size()) + " overlay masks");
    for (const auto& m : masks) check_aligned(ct.header, m.header);

    const int nx = ct.header.dims[0], ny = ct.header.dims[1], nz = ct.header.dims[2];
    if (slice_z < 0 || slice_z >= nz)
        throw Error(ErrorCode::SliceOutOfRange, "slice " + std::to_string(slice_z) +
                                                    " outside [0, " + std::to_string(nz) + ")");

    RgbImage img;
    img.width = nx;
    img.height = ny;
    img.pixels.resize(static_cast<std::size_t>(nx) * ny);

    double lo = ct.at(0, 0, slice_z), hi = lo;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            const double v = ct.at(x, y, slice_z);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double span = hi - lo;

    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            std::uint8_t g = 128;
            if (span > 0.0) {
                const double t = (ct.at(x, y, slice_z) - lo) / span;
                g = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
            }
            img.pixels[static_cast<std::size_t>(y) * nx + x] = {g, g, g};
        }

    // in-slice 4-connectivity contour per mask; grid edges count as outside
    for (std::size_t k = 0; k < masks.size(); ++k) {
        const LabelMap& m = masks[k];
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (m.at(x, y, slice_z) == 0) continue;
                const bool contour = x == 0 || m.at(x - 1, y, slice_z) == 0 || x == nx - 1 ||
                                     m.at(x + 1, y, slice_z) == 0 || y == 0 ||
                                     m.at(x, y - 1, slice_z) == 0 || y == ny - 1 ||
                                     m.at(x, y + 1, slice_z) == 0;
                if (contour)
                    img.pixels[static_cast<std::size_t>(y) * nx + x] = kContourColors[k];
            }
    }
    return img;
}

std::vector<std::uint8_t> ppm_bytes(const RgbImage& image) {
    std::string header = "P6\n" + std::to_string(image.width) + " " +
                         std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + image.pixels.size() * 3);
    for (const auto& px : image.pixels) {
        bytes.push_back(px[0]);
        bytes.push_back(px[1]);
        bytes.push_back(px[2]);
    }
    return bytes;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
    write_file_bytes(path, ppm_bytes(image));
}

}  // namespace priorseg
