#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "autonet/volume.hpp"

namespace autonet {

// Per-voxel class probabilities; voxel-major, class-fastest. Class 1 is the
// foreground ("brain") class throughout.
struct PosteriorVolume {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  int classes = 2;
  std::vector<float> data;

  PosteriorVolume() = default;
  PosteriorVolume(std::array<int, 3> d, int c, std::array<double, 3> sp = {1.0, 1.0, 1.0})
      : dims(d), spacing(sp), classes(c),
        data(static_cast<std::size_t>(d[0]) * d[1] * d[2] * c, 0.0f) {}

  static PosteriorVolume uniform(std::array<int, 3> d, int c,
                                 std::array<double, 3> sp = {1.0, 1.0, 1.0}) {
    PosteriorVolume p(d, c, sp);
    const float u = 1.0f / static_cast<float>(c);
    std::fill(p.data.begin(), p.data.end(), u);
    return p;
  }

  std::size_t voxels() const { return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]; }

  std::size_t voxel_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  float prob(std::size_t voxel, int cls) const { return data[voxel * classes + cls]; }
  float& prob(std::size_t voxel, int cls) { return data[voxel * classes + cls]; }
  float at(int i, int j, int k, int cls) const { return prob(voxel_index(i, j, k), cls); }
  float& at(int i, int j, int k, int cls) { return prob(voxel_index(i, j, k), cls); }
};

// Checks normalization (sum to 1 within tol, entries >= 0).
void validate(const PosteriorVolume& p, double tol = 1e-6);

// Posteriors are stored on disk as the foreground-probability volume; the
// background probability is implied for two-class problems.
void save_posterior(const PosteriorVolume& p, const std::string& path);
PosteriorVolume load_posterior(const std::string& path);

}  // namespace autonet
