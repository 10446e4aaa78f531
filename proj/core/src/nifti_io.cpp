#include "priorseg/nifti_io.hpp"

#include <zlib.h>

#include <cfloat>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace priorseg {

namespace {

// Byte offsets of the NIfTI-1 header fields this toolkit interprets.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;        // int16 dim[8]
constexpr std::size_t kOffDatatype = 70;   // int16
constexpr std::size_t kOffBitpix = 72;     // int16
constexpr std::size_t kOffPixdim = 76;     // float pixdim[8]
constexpr std::size_t kOffVoxOffset = 108; // float
constexpr std::size_t kOffSclSlope = 112;  // float
constexpr std::size_t kOffSclInter = 116;  // float
constexpr std::size_t kOffMagic = 344;     // char[4]

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kMinVoxOffset = 352;
constexpr int kMaxDim = 4096;

template <typename T>
T read_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    return value;
}

template <typename T>
void write_le(std::span<std::uint8_t> bytes, std::size_t offset, T value) {
    std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

std::string where(std::string_view source_name) { return std::string(source_name) + ": "; }

bool valid_datatype(std::uint16_t code) {
    switch (static_cast<Datatype>(code)) {
        case Datatype::Uint8:
        case Datatype::Int16:
        case Datatype::Uint16:
        case Datatype::Float32:
            return true;
    }
    return false;
}

std::int16_t bitpix_for(Datatype dt) {
    return static_cast<std::int16_t>(8 * byte_width(dt));
}

}  // namespace

const char* to_string(Datatype dt) {
    switch (dt) {
        case Datatype::Uint8: return "uint8";
        case Datatype::Int16: return "int16";
        case Datatype::Uint16: return "uint16";
        case Datatype::Float32: return "float32";
    }
    return "unknown";
}

std::size_t byte_width(Datatype dt) {
    switch (dt) {
        case Datatype::Uint8: return 1;
        case Datatype::Int16: return 2;
        case Datatype::Uint16: return 2;
        case Datatype::Float32: return 4;
    }
    return 0;
}

NiftiHeader make_header(std::array<int, 3> dims, std::array<float, 3> pixdim_mm, Datatype dt) {
    NiftiHeader h;
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1 || dims[a] > kMaxDim)
            throw Error(ErrorCode::DimOutOfRange,
                        "dim[" + std::to_string(a + 1) + "] = " + std::to_string(dims[a]) +
                            " (supported 1.." + std::to_string(kMaxDim) + ")");
        if (!(pixdim_mm[a] > 0.0f) || !std::isfinite(pixdim_mm[a]))
            throw Error(ErrorCode::BadPixdim, "pixdim[" + std::to_string(a + 1) +
                                                  "] = " + std::to_string(pixdim_mm[a]) +
                                                  " (must be finite and > 0)");
    }
    h.dims = dims;
    h.pixdim_mm = pixdim_mm;
    h.datatype = dt;
    return h;
}

Volume3D Volume3D::zeros(std::array<int, 3> dims, std::array<float, 3> pixdim_mm) {
    Volume3D v;
    v.header = make_header(dims, pixdim_mm, Datatype::Float32);
    v.data.assign(v.header.voxel_count(), 0.0);
    return v;
}

LabelMap LabelMap::zeros(std::array<int, 3> dims, std::array<float, 3> pixdim_mm) {
    LabelMap m;
    m.header = make_header(dims, pixdim_mm, Datatype::Uint8);
    m.data.assign(m.header.voxel_count(), 0);
    return m;
}

std::size_t LabelMap::foreground_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v > 0);
    return n;
}

bool looks_gzipped(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B;
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error(ErrorCode::IoFailure, "deflateInit2 failed");

    // Pin the gzip header so output bytes depend on input bytes only.
    gz_header gzh{};
    gzh.time = 0;
    gzh.os = 3;  // unix
    deflateSetHeader(&zs, &gzh);

    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())));
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(ErrorCode::IoFailure, "deflate failed");
    out.resize(zs.total_out);
    return out;
}

std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes,
                                          std::string_view source_name) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK)
        throw Error(ErrorCode::IoFailure, "inflateInit2 failed");

    std::vector<std::uint8_t> out;
    out.resize(std::max<std::size_t>(bytes.size() * 4, 4096));
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    std::size_t written = 0;
    int rc = Z_OK;
    while (true) {
        zs.next_out = out.data() + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&zs, Z_NO_FLUSH);
        written = zs.total_out;
        if (rc == Z_STREAM_END) break;
        if (rc == Z_OK || rc == Z_BUF_ERROR) {
            if (zs.avail_in == 0 && rc == Z_BUF_ERROR) break;  // truncated stream
            out.resize(out.size() * 2);
            continue;
        }
        inflateEnd(&zs);
        throw Error(ErrorCode::BadGzip, where(source_name) + "corrupt gzip stream (zlib rc " +
                                            std::to_string(rc) + ")");
    }
    inflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw Error(ErrorCode::BadGzip, where(source_name) + "gzip stream ends prematurely");
    out.resize(written);
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed on " + path.string());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
}

Volume3D parse_volume(std::span<const std::uint8_t> bytes, std::string_view source_name) {
    if (bytes.size() < kHeaderSize)
        throw Error(ErrorCode::TruncatedFile,
                    where(source_name) + "header truncated: " + std::to_string(bytes.size()) +
                        " bytes, need " + std::to_string(kHeaderSize));

    const char* magic = reinterpret_cast<const char*>(bytes.data() + kOffMagic);
    if (std::memcmp(magic, "n+1\0", 4) != 0)
        throw Error(ErrorCode::BadMagic,
                    where(source_name) + "magic is not \"n+1\" (single-file NIfTI-1)");

    const auto sizeof_hdr = read_le<std::int32_t>(bytes, kOffSizeofHdr);
    if (sizeof_hdr != 348) {
        if (sizeof_hdr == 0x5C010000)
            throw Error(ErrorCode::ByteSwapped,
                        where(source_name) + "big-endian file; only little-endian is supported");
        throw Error(ErrorCode::BadHeaderField,
                    where(source_name) + "sizeof_hdr = " + std::to_string(sizeof_hdr));
    }

    const auto dt_code = read_le<std::uint16_t>(bytes, kOffDatatype);
    if (!valid_datatype(dt_code))
        throw Error(ErrorCode::UnsupportedDatatype,
                    where(source_name) + "datatype code " + std::to_string(dt_code) +
                        " (supported: uint8=2, int16=4, float32=16, uint16=512)");
    const auto dt = static_cast<Datatype>(dt_code);

    const auto bitpix = read_le<std::int16_t>(bytes, kOffBitpix);
    if (bitpix != bitpix_for(dt))
        throw Error(ErrorCode::BadHeaderField,
                    where(source_name) + "bitpix = " + std::to_string(bitpix) + ", expected " +
                        std::to_string(bitpix_for(dt)) + " for " + to_string(dt));

    const auto ndim = read_le<std::int16_t>(bytes, kOffDim);
    if (ndim < 1 || ndim > 4)
        throw Error(ErrorCode::DimOutOfRange,
                    where(source_name) + "dim[0] = " + std::to_string(ndim) +
                        " (supported 1..4 with trailing dims of 1)");

    NiftiHeader h;
    h.datatype = dt;
    for (int a = 0; a < 3; ++a) {
        if (a + 1 <= ndim) {
            const auto d = read_le<std::int16_t>(bytes, kOffDim + 2 * (a + 1));
            if (d < 1 || d > kMaxDim)
                throw Error(ErrorCode::DimOutOfRange,
                            where(source_name) + "dim[" + std::to_string(a + 1) +
                                "] = " + std::to_string(d) + " (supported 1.." +
                                std::to_string(kMaxDim) + ")");
            h.dims[a] = d;
        } else {
            h.dims[a] = 1;
        }
    }
    if (ndim == 4) {
        const auto d4 = read_le<std::int16_t>(bytes, kOffDim + 8);
        if (d4 != 1)
            throw Error(ErrorCode::DimOutOfRange,
                        where(source_name) + "dim[4] = " + std::to_string(d4) +
                            " (time series are unsupported)");
    }

    for (int a = 0; a < 3; ++a) {
        const float p = read_le<float>(bytes, kOffPixdim + 4 * (a + 1));
        if (a + 1 <= ndim) {
            if (!std::isfinite(p) || !(p > 0.0f))
                throw Error(ErrorCode::BadPixdim, where(source_name) + "pixdim[" +
                                                      std::to_string(a + 1) + "] = " +
                                                      std::to_string(p) +
                                                      " (must be finite and > 0)");
            h.pixdim_mm[a] = p;
        } else {
            h.pixdim_mm[a] = (std::isfinite(p) && p > 0.0f) ? p : 1.0f;
        }
    }

    float slope = read_le<float>(bytes, kOffSclSlope);
    float inter = read_le<float>(bytes, kOffSclInter);
    if (!std::isfinite(slope))
        throw Error(ErrorCode::BadHeaderField, where(source_name) + "scl_slope is not finite");
    if (!std::isfinite(inter))
        throw Error(ErrorCode::BadHeaderField, where(source_name) + "scl_inter is not finite");
    if (slope == 0.0f) {  // NIfTI convention: slope 0 means unscaled
        slope = 1.0f;
        inter = 0.0f;
    }
    h.scl_slope = slope;
    h.scl_inter = inter;

    const float vox_offset_f = read_le<float>(bytes, kOffVoxOffset);
    if (!std::isfinite(vox_offset_f) || vox_offset_f != std::floor(vox_offset_f) ||
        vox_offset_f < static_cast<float>(kMinVoxOffset))
        throw Error(ErrorCode::BadVoxOffset,
                    where(source_name) + "vox_offset = " + std::to_string(vox_offset_f) +
                        " (must be an integer >= " + std::to_string(kMinVoxOffset) + ")");
    h.vox_offset = static_cast<std::int64_t>(vox_offset_f);

    std::memcpy(h.raw.data(), bytes.data(), kHeaderSize);
    h.has_raw = true;

    const std::size_t n = h.voxel_count();
    const std::size_t payload = n * byte_width(dt);
    if (bytes.size() < static_cast<std::size_t>(h.vox_offset) + payload)
        throw Error(ErrorCode::TruncatedFile,
                    where(source_name) + "data truncated: file has " +
                        std::to_string(bytes.size()) + " bytes, need " +
                        std::to_string(static_cast<std::size_t>(h.vox_offset) + payload));

    Volume3D v;
    v.header = h;
    v.data.resize(n);
    const std::uint8_t* p = bytes.data() + h.vox_offset;
    const double s = static_cast<double>(slope);
    const double b = static_cast<double>(inter);
    switch (dt) {
        case Datatype::Uint8:
            for (std::size_t i = 0; i < n; ++i) v.data[i] = s * p[i] + b;
            break;
        case Datatype::Int16:
            for (std::size_t i = 0; i < n; ++i) {
                std::int16_t raw;
                std::memcpy(&raw, p + 2 * i, 2);
                v.data[i] = s * raw + b;
            }
            break;
        case Datatype::Uint16:
            for (std::size_t i = 0; i < n; ++i) {
                std::uint16_t raw;
                std::memcpy(&raw, p + 2 * i, 2);
                v.data[i] = s * raw + b;
            }
            break;
        case Datatype::Float32:
            for (std::size_t i = 0; i < n; ++i) {
                float raw;
                std::memcpy(&raw, p + 4 * i, 4);
                const double val = s * static_cast<double>(raw) + b;
                if (!std::isfinite(val))
                    throw Error(ErrorCode::NonFiniteValue,
                                where(source_name) + "non-finite value at voxel " +
                                    std::to_string(i));
                v.data[i] = val;
            }
            break;
    }
    return v;
}

Volume3D read_volume(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    if (looks_gzipped(bytes)) bytes = gzip_decompress(bytes, path.string());
    return parse_volume(bytes, path.string());
}

std::vector<std::uint8_t> serialize_volume(const Volume3D& v, Datatype dt) {
    const std::size_t n = v.header.voxel_count();
    if (v.data.size() != n)
        throw Error(ErrorCode::BadHeaderField,
                    "data length " + std::to_string(v.data.size()) +
                        " does not match dims product " + std::to_string(n));

    std::vector<std::uint8_t> out(kMinVoxOffset + n * byte_width(dt), 0);
    std::span<std::uint8_t> hdr(out.data(), kHeaderSize);

    if (v.header.has_raw) std::memcpy(hdr.data(), v.header.raw.data(), kHeaderSize);

    write_le<std::int32_t>(hdr, kOffSizeofHdr, 348);
    write_le<std::int16_t>(hdr, kOffDim, 3);
    for (int a = 0; a < 3; ++a)
        write_le<std::int16_t>(hdr, kOffDim + 2 * (a + 1),
                               static_cast<std::int16_t>(v.header.dims[a]));
    for (std::size_t i = 4; i <= 7; ++i) write_le<std::int16_t>(hdr, kOffDim + 2 * i, 1);
    write_le<std::uint16_t>(hdr, kOffDatatype, static_cast<std::uint16_t>(dt));
    write_le<std::int16_t>(hdr, kOffBitpix, bitpix_for(dt));
    for (int a = 0; a < 3; ++a)
        write_le<float>(hdr, kOffPixdim + 4 * (a + 1), v.header.pixdim_mm[a]);
    write_le<float>(hdr, kOffVoxOffset, static_cast<float>(kMinVoxOffset));
    write_le<float>(hdr, kOffSclSlope, 1.0f);
    write_le<float>(hdr, kOffSclInter, 0.0f);
    std::memcpy(hdr.data() + kOffMagic, "n+1\0", 4);
    // bytes 348..351 stay zero: no header extensions

    std::uint8_t* p = out.data() + kMinVoxOffset;
    for (std::size_t i = 0; i < n; ++i) {
        const double val = v.data[i];
        switch (dt) {
            case Datatype::Uint8: {
                if (val != std::floor(val) || val < 0.0 || val > 255.0)
                    throw Error(ErrorCode::ValueOverflow,
                                "voxel " + std::to_string(i) + " value " + std::to_string(val) +
                                    " not representable as uint8");
                p[i] = static_cast<std::uint8_t>(val);
                break;
            }
            case Datatype::Int16: {
                if (val != std::floor(val) || val < -32768.0 || val > 32767.0)
                    throw Error(ErrorCode::ValueOverflow,
                                "voxel " + std::to_string(i) + " value " + std::to_string(val) +
                                    " not representable as int16");
                const auto raw = static_cast<std::int16_t>(val);
                std::memcpy(p + 2 * i, &raw, 2);
                break;
            }
            case Datatype::Uint16: {
                if (val != std::floor(val) || val < 0.0 || val > 65535.0)
                    throw Error(ErrorCode::ValueOverflow,
                                "voxel " + std::to_string(i) + " value " + std::to_string(val) +
                                    " not representable as uint16");
                const auto raw = static_cast<std::uint16_t>(val);
                std::memcpy(p + 2 * i, &raw, 2);
                break;
            }
            case Datatype::Float32: {
                if (!std::isfinite(val) || std::abs(val) > static_cast<double>(FLT_MAX))
                    throw Error(ErrorCode::ValueOverflow,
                                "voxel " + std::to_string(i) + " value " + std::to_string(val) +
                                    " not representable as float32");
                const auto raw = static_cast<float>(val);
                std::memcpy(p + 4 * i, &raw, 4);
                break;
            }
        }
    }
    return out;
}

void write_volume(const Volume3D& v, const std::filesystem::path& path, Datatype dt) {
    auto bytes = serialize_volume(v, dt);
    if (path.extension() == ".gz") {
        auto gz = gzip_compress(bytes);
        write_file_bytes(path, gz);
    } else {
        write_file_bytes(path, bytes);
    }
}

LabelMap labelmap_from_volume(const Volume3D& v, std::string_view source_name) {
    LabelMap m;
    m.header = v.header;
    m.data.resize(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double val = v.data[i];
        if (val != std::floor(val) || val < 0.0 || val > 255.0)
            throw Error(ErrorCode::BadLabelValue,
                        where(source_name) + "voxel " + std::to_string(i) + " value " +
                            std::to_string(val) + " is not a label in {0..255}");
        m.data[i] = static_cast<std::uint8_t>(val);
    }
    return m;
}

Volume3D volume_from_labelmap(const LabelMap& m) {
    Volume3D v;
    v.header = m.header;
    v.data.assign(m.data.begin(), m.data.end());
    return v;
}

LabelMap read_labelmap(const std::filesystem::path& path) {
    return labelmap_from_volume(read_volume(path), path.string());
}

void write_labelmap(const LabelMap& m, const std::filesystem::path& path) {
    write_volume(volume_from_labelmap(m), path, Datatype::Uint8);
}

void check_aligned(const NiftiHeader& a, const NiftiHeader& b) {
    for (int axis = 0; axis < 3; ++axis) {
        if (a.dims[axis] != b.dims[axis])
            throw Error(ErrorCode::GridMismatch,
                        "dims differ on axis " + std::to_string(axis) + ": " +
                            std::to_string(a.dims[axis]) + " vs " + std::to_string(b.dims[axis]));
    }
    for (int axis = 0; axis < 3; ++axis) {
        const double d = std::abs(static_cast<double>(a.pixdim_mm[axis]) -
                                  static_cast<double>(b.pixdim_mm[axis]));
        if (d > 1e-4)
            throw Error(ErrorCode::GridMismatch,
                        "pixdim differs on axis " + std::to_string(axis) + ": " +
                            std::to_string(a.pixdim_mm[axis]) + " vs " +
                            std::to_string(b.pixdim_mm[axis]) + " mm (tolerance 1e-4)");
    }
}

}  // namespace priorseg
