#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "autonet/common.hpp"

namespace autonet {

// 3D scalar grid, voxel (i,j,k) stored x-fastest at i + nx*(j + ny*k).
struct Volume {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::vector<float> data;

  Volume() = default;
  Volume(int nx, int ny, int nz, float fill = 0.0f,
         std::array<double, 3> sp = {1.0, 1.0, 1.0})
      : dims{nx, ny, nz},
        spacing(sp),
        data(static_cast<std::size_t>(nx) * ny * nz, fill) {}

  int nx() const { return dims[0]; }
  int ny() const { return dims[1]; }
  int nz() const { return dims[2]; }
  std::size_t size() const { return data.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  float& at(int i, int j, int k) { return data[index(i, j, k)]; }
  float at(int i, int j, int k) const { return data[index(i, j, k)]; }
  bool contains(int i, int j, int k) const {
    return i >= 0 && i < dims[0] && j >= 0 && j < dims[1] && k >= 0 && k < dims[2];
  }
};

// Per-voxel labels in {0,1}; same layout and metadata as Volume.
struct BinaryMask {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int nx, int ny, int nz, std::uint8_t fill = 0,
             std::array<double, 3> sp = {1.0, 1.0, 1.0})
      : dims{nx, ny, nz},
        spacing(sp),
        data(static_cast<std::size_t>(nx) * ny * nz, fill) {}

  int nx() const { return dims[0]; }
  int ny() const { return dims[1]; }
  int nz() const { return dims[2]; }
  std::size_t size() const { return data.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  std::uint8_t& at(int i, int j, int k) { return data[index(i, j, k)]; }
  std::uint8_t at(int i, int j, int k) const { return data[index(i, j, k)]; }
  bool contains(int i, int j, int k) const {
    return i >= 0 && i < dims[0] && j >= 0 && j < dims[1] && k >= 0 && k < dims[2];
  }
};

// Throw ValidationError if invariants are broken (finiteness, positive
// spacing, labels in {0,1}, extents matching dims).
void validate(const Volume& v);
void validate(const BinaryMask& m);

struct LoadResult {
  Volume volume;
  std::optional<BinaryMask> mask;  // present only for integer {0,1} files
};

// Reads NIfTI-1 (.nii / .nii.gz) or the AUTONET-RAW v1 format, detected by
// content. Integer files whose values are all 0/1 also yield a mask.
LoadResult load_volume(const std::string& path);

// Format chosen by extension: .raw | .nii | .nii.gz. RAW round-trips
// bit-exactly; NIfTI stores float32 (volumes) or uint8 (masks).
void save_volume(const Volume& v, const std::string& path);
void save_volume(const BinaryMask& m, const std::string& path);

// Min-max rescale to [0, 255]; a constant volume maps to all zeros.
Volume normalize_intensity(const Volume& v);

// Arithmetic mean over all voxels (double accumulation).
double mean_intensity(const Volume& v);

}  // namespace autonet
