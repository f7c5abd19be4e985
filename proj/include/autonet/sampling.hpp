#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "autonet/volume.hpp"

namespace autonet {

enum class Stratum : std::uint8_t { border = 0, brain = 1, nonbrain = 2 };

const char* stratum_name(Stratum s);

// Voxels whose cube^3 neighborhood (clipped at the volume bounds) contains
// both labels.
BinaryMask border_mask(const BinaryMask& m, int cube = 5);

struct SamplingPlan {
  std::vector<std::array<int, 3>> voxels;
  std::vector<Stratum> strata;         // parallel to voxels
  std::vector<std::uint8_t> labels;    // true mask label of each voxel
  std::uint64_t seed = 0;
  int per_image_total = 0;
  std::array<double, 3> fractions{0.5, 0.25, 0.25};

  std::size_t size() const { return voxels.size(); }
  std::array<int, 3> stratum_counts() const;
};

std::string to_json(const SamplingPlan& plan);
SamplingPlan sampling_plan_from_json(const std::string& json_text);

// Stratified draw over {border, brain-interior, nonbrain-interior}. Quotas
// follow largest-remainder rounding of total*fractions. Within a stratum
// voxels are drawn without replacement until the stratum is exhausted, then
// with replacement. Deterministic per seed.
SamplingPlan sample_training_voxels(const BinaryMask& m, int total,
                                    std::array<double, 3> fractions, std::uint64_t seed,
                                    int border_cube = 5);

// Largest-remainder rounding of total*fractions (ties favor earlier entries).
std::array<int, 3> stratum_quotas(int total, std::array<double, 3> fractions);

}  // namespace autonet
