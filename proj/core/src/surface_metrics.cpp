#include "priorseg/surface_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "priorseg/percentile.hpp"

namespace priorseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D lower-envelope pass (Felzenszwalb & Huttenlocher) at integer positions
// with squared step weight w. Parabolas at +infinity sources are skipped so
// partially-seeded lines stay exact.
void dt1d(const double* f, int n, double w, int* v, double* z, double* out) {
    int k = -1;
    for (int i = 0; i < n; ++i) {
        if (f[i] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = i;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s;
        for (;;) {
            const int vk = v[k];
            s = ((f[i] + w * static_cast<double>(i) * i) -
                 (f[vk] + w * static_cast<double>(vk) * vk)) /
                (2.0 * w * static_cast<double>(i - vk));
            if (s <= z[k])
                --k;  // z[0] = -inf keeps k >= 0
            else
                break;
        }
        ++k;
        v[k] = i;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out, out + n, kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < static_cast<double>(q)) ++j;
        const double dq = static_cast<double>(q - v[j]);
        out[q] = w * dq * dq + f[v[j]];
    }
}

}  // namespace

namespace detail {

void edt_squared(std::vector<double>& d, const std::array<int, 3>& dims,
                 const std::array<double, 3>& axis_weight_sq) {
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    const int nmax = std::max({nx, ny, nz});

    std::vector<double> f(nmax), out(nmax), z(nmax + 1);
    std::vector<int> v(nmax);

    // x pass: contiguous lines
    if (nx > 1) {
        for (int zz = 0; zz < nz; ++zz)
            for (int yy = 0; yy < ny; ++yy) {
                double* line = d.data() + yy * sy + zz * sz;
                std::copy(line, line + nx, f.data());
                dt1d(f.data(), nx, axis_weight_sq[0], v.data(), z.data(), line);
            }
    }
    // y pass
    if (ny > 1) {
        for (int zz = 0; zz < nz; ++zz)
            for (int xx = 0; xx < nx; ++xx) {
                double* base = d.data() + xx + zz * sz;
                for (int yy = 0; yy < ny; ++yy) f[yy] = base[yy * sy];
                dt1d(f.data(), ny, axis_weight_sq[1], v.data(), z.data(), out.data());
                for (int yy = 0; yy < ny; ++yy) base[yy * sy] = out[yy];
            }
    }
    // z pass
    if (nz > 1) {
        for (int yy = 0; yy < ny; ++yy)
            for (int xx = 0; xx < nx; ++xx) {
                double* base = d.data() + xx + yy * sy;
                for (int zz = 0; zz < nz; ++zz) f[zz] = base[zz * sz];
                dt1d(f.data(), nz, axis_weight_sq[2], v.data(), z.data(), out.data());
                for (int zz = 0; zz < nz; ++zz) base[zz * sz] = out[zz];
            }
    }
}

std::vector<double> surface_distances(const SurfaceSet& from, const SurfaceSet& to) {
    if (to.voxels.empty())
        throw Error(ErrorCode::EmptyMask, "surface_distances: target surface is empty");
    if (from.voxels.empty()) return {};

    std::array<int, 3> lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                          std::numeric_limits<int>::max()};
    std::array<int, 3> hi{std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
                          std::numeric_limits<int>::min()};
    auto grow = [&](const std::vector<std::array<int, 3>>& vs) {
        for (const auto& p : vs)
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
    };
    grow(from.voxels);
    grow(to.voxels);

    const std::array<int, 3> box{hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    const std::size_t nbox = static_cast<std::size_t>(box[0]) * box[1] * box[2];
    std::vector<double> d(nbox, kInf);
    auto box_index = [&](const std::array<int, 3>& p) {
        return static_cast<std::size_t>(p[0] - lo[0]) +
               static_cast<std::size_t>(box[0]) *
                   (static_cast<std::size_t>(p[1] - lo[1]) +
                    static_cast<std::size_t>(box[1]) * static_cast<std::size_t>(p[2] - lo[2]));
    };
    for (const auto& p : to.voxels) d[box_index(p)] = 0.0;

    const std::array<double, 3> wsq{
        static_cast<double>(from.spacing_mm[0]) * static_cast<double>(from.spacing_mm[0]),
        static_cast<double>(from.spacing_mm[1]) * static_cast<double>(from.spacing_mm[1]),
        static_cast<double>(from.spacing_mm[2]) * static_cast<double>(from.spacing_mm[2])};
    edt_squared(d, box, wsq);

    std::vector<double> dist;
    dist.reserve(from.voxels.size());
    for (const auto& p : from.voxels) dist.push_back(std::sqrt(d[box_index(p)]));
    return dist;
}

}  // namespace detail

double dice(const LabelMap& gt, const LabelMap& pred) {
    check_aligned(gt.header, pred.header);
    std::size_t nx = 0, ny = 0, ni = 0;
    const std::size_t n = gt.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool a = gt.data[i] > 0;
        const bool b = pred.data[i] > 0;
        nx += a;
        ny += b;
        ni += (a && b);
    }
    if (nx == 0 && ny == 0) return 1.0;
    if (nx == 0 || ny == 0) return 0.0;
    return 2.0 * static_cast<double>(ni) / static_cast<double>(nx + ny);
}

SurfaceSet extract_surface(const LabelMap& mask) {
    SurfaceSet s;
    s.spacing_mm = mask.header.pixdim_mm;
    const int nx = mask.header.dims[0], ny = mask.header.dims[1], nz = mask.header.dims[2];
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    const std::uint8_t* m = mask.data.data();

    std::size_t i = 0;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x, ++i) {
                if (m[i] == 0) continue;
                const bool boundary =
                    (x == 0 || m[i - 1] == 0) || (x == nx - 1 || m[i + 1] == 0) ||
                    (y == 0 || m[i - sy] == 0) || (y == ny - 1 || m[i + sy] == 0) ||
                    (z == 0 || m[i - sz] == 0) || (z == nz - 1 || m[i + sz] == 0);
                if (boundary) s.voxels.push_back({x, y, z});
            }
    return s;
}

Volume3D edt(const LabelMap& mask) {
    const auto& dims = mask.header.dims;
    std::vector<double> d(mask.data.size());
    for (std::size_t i = 0; i < mask.data.size(); ++i) d[i] = mask.data[i] > 0 ? 0.0 : kInf;

    const std::array<double, 3> wsq{
        static_cast<double>(mask.header.pixdim_mm[0]) * mask.header.pixdim_mm[0],
        static_cast<double>(mask.header.pixdim_mm[1]) * mask.header.pixdim_mm[1],
        static_cast<double>(mask.header.pixdim_mm[2]) * mask.header.pixdim_mm[2]};
    detail::edt_squared(d, dims, wsq);
    for (double& x : d) x = std::sqrt(x);

    Volume3D out;
    out.header = mask.header;
    out.header.datatype = Datatype::Float32;
    out.data = std::move(d);
    return out;
}

namespace {

void check_percentile(double p) {
    if (!(p > 0.0) || p > 100.0)
        throw Error(ErrorCode::SchemaError,
                    "percentile " + std::to_string(p) + " outside (0, 100]");
}

double directed_max_percentile(std::vector<double>& a, std::vector<double>& b, double p) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return std::max(percentile_sorted(a, p), percentile_sorted(b, p));
}

}  // namespace

double hausdorff(const LabelMap& gt, const LabelMap& pred, double percentile) {
    check_percentile(percentile);
    check_aligned(gt.header, pred.header);
    SurfaceSet sx = extract_surface(gt);
    SurfaceSet sy = extract_surface(pred);
    if (sx.voxels.empty()) throw Error(ErrorCode::EmptyMask, "gt mask has no foreground");
    if (sy.voxels.empty()) throw Error(ErrorCode::EmptyMask, "pred mask has no foreground");
    auto dxy = detail::surface_distances(sx, sy);
    auto dyx = detail::surface_distances(sy, sx);
    return directed_max_percentile(dxy, dyx, percentile);
}

MetricResult evaluate_pair(const LabelMap& gt, const LabelMap& pred, double percentile) {
    check_percentile(percentile);
    check_aligned(gt.header, pred.header);

    MetricResult r;
    std::size_t nx = 0, ny = 0, ni = 0;
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        const bool a = gt.data[i] > 0;
        const bool b = pred.data[i] > 0;
        nx += a;
        ny += b;
        ni += (a && b);
    }
    r.voxel_counts = {nx, ny, ni};
    r.dsc = (nx == 0 && ny == 0) ? 1.0
            : (nx == 0 || ny == 0)
                ? 0.0
                : 2.0 * static_cast<double>(ni) / static_cast<double>(nx + ny);

    if (nx == 0 || ny == 0) return r;  // HD undefined, not 0

    SurfaceSet sx = extract_surface(gt);
    SurfaceSet sy = extract_surface(pred);
    auto dxy = detail::surface_distances(sx, sy);
    auto dyx = detail::surface_distances(sy, sx);
    std::sort(dxy.begin(), dxy.end());
    std::sort(dyx.begin(), dyx.end());
    r.hd_mm = std::max(dxy.back(), dyx.back());
    r.hd95_mm = std::max(percentile_sorted(dxy, percentile), percentile_sorted(dyx, percentile));
    return r;
}

}  // namespace priorseg
