#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "priorseg/error.hpp"

namespace priorseg {

// NIfTI-1 datatype codes for the subset this toolkit reads and writes.
enum class Datatype : std::uint16_t {
    Uint8 = 2,
    Int16 = 4,
    Float32 = 16,
    Uint16 = 512,
};

const char* to_string(Datatype dt);
std::size_t byte_width(Datatype dt);

// Parsed view of a NIfTI-1 header. Only axis-aligned single-file (.nii/.nii.gz)
// volumes are supported; orientation fields are kept in `raw` and round-tripped
// verbatim, never interpreted.
struct NiftiHeader {
    std::array<int, 3> dims{1, 1, 1};
    std::array<float, 3> pixdim_mm{1.0f, 1.0f, 1.0f};
    Datatype datatype = Datatype::Float32;
    float scl_slope = 1.0f;
    float scl_inter = 0.0f;
    std::int64_t vox_offset = 352;

    std::array<std::uint8_t, 348> raw{};
    bool has_raw = false;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
};

NiftiHeader make_header(std::array<int, 3> dims, std::array<float, 3> pixdim_mm,
                        Datatype dt = Datatype::Float32);

// Scalar 3D grid in x-fastest order. Values are the file values with
// scl_slope/scl_inter already applied.
struct Volume3D {
    NiftiHeader header;
    std::vector<double> data;

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(header.dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(header.dims[1]) * static_cast<std::size_t>(z));
    }
    double at(int x, int y, int z) const { return data[index(x, y, z)]; }
    double& at(int x, int y, int z) { return data[index(x, y, z)]; }

    static Volume3D zeros(std::array<int, 3> dims, std::array<float, 3> pixdim_mm);
};

// Small-integer 3D grid aligned to a Volume3D. Voxels > 0 are foreground.
struct LabelMap {
    NiftiHeader header;
    std::vector<std::uint8_t> data;

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(header.dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(header.dims[1]) * static_cast<std::size_t>(z));
    }
    std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
    std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }

    std::size_t foreground_count() const;
    bool empty_mask() const { return foreground_count() == 0; }

    static LabelMap zeros(std::array<int, 3> dims, std::array<float, 3> pixdim_mm);
};

// Reads a .nii or .nii.gz volume (gzip detected by the 0x1F8B prefix).
Volume3D read_volume(const std::filesystem::path& path);

// Parses an uncompressed NIfTI-1 byte stream. `source_name` is used in error
// messages only.
Volume3D parse_volume(std::span<const std::uint8_t> bytes, std::string_view source_name);

// Writes the volume with the given on-disk datatype. Integer datatypes require
// every value to be integral and in range (ValueOverflow otherwise); float32
// requires magnitude <= FLT_MAX. A ".gz" suffix selects the gzip container.
void write_volume(const Volume3D& v, const std::filesystem::path& path, Datatype dt);

// In-memory equivalent of write_volume without the gzip container.
std::vector<std::uint8_t> serialize_volume(const Volume3D& v, Datatype dt);

// Reads a volume and checks every value is an integer in [0, 255].
LabelMap read_labelmap(const std::filesystem::path& path);
void write_labelmap(const LabelMap& m, const std::filesystem::path& path);

LabelMap labelmap_from_volume(const Volume3D& v, std::string_view source_name);
Volume3D volume_from_labelmap(const LabelMap& m);

// Succeeds iff dims match exactly and pixdim matches within 1e-4 mm per axis.
void check_aligned(const NiftiHeader& a, const NiftiHeader& b);

// gzip helpers shared by nifti_io and the report writers. Compression is
// pinned (level 6, zero mtime) so identical input bytes give identical output
// bytes.
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes,
                                          std::string_view source_name);
bool looks_gzipped(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace priorseg
