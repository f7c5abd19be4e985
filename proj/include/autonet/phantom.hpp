#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "autonet/volume.hpp"

namespace autonet {

// Synthetic head-like test volume: one bright ellipsoid ("brain") on a dark
// background, surrounded by smaller bright blobs that do not belong to the
// mask, plus optional smooth multiplicative shading and additive noise.
struct PhantomSpec {
  std::array<int, 3> dims{64, 64, 64};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  std::array<double, 3> brain_center{32.0, 32.0, 32.0};
  std::array<double, 3> brain_axes{20.0, 24.0, 18.0};  // semi-axes in voxels

  int distractor_count = 0;
  std::array<double, 2> distractor_radius_range{2.0, 5.0};  // semi-axis range
  double distractor_intensity = 85.0;

  double intensity_brain = 100.0;
  double intensity_background = 10.0;
  double noise_sigma = 0.0;

  // Multiplicative shading 1 + sum(c_i * m_i(u,v,w)) over normalized
  // coordinates u,v,w in [-1,1]; monomial order: u, v, w, u^2, v^2, w^2,
  // uv, uw, vw. Empty = no shading.
  std::vector<double> bias_coeffs;
};

void validate(const PhantomSpec& spec);

std::string to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const std::string& json_text);

// Pure function of (spec, seed): identical inputs give identical voxels.
// The mask is exactly the brain ellipsoid interior; distractors stay label 0.
std::pair<Volume, BinaryMask> generate_phantom(const PhantomSpec& spec, std::uint64_t seed);

}  // namespace autonet
