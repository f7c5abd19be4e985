#include "autonet/phantom.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "autonet/rng.hpp"

namespace autonet {

using nlohmann::json;

void validate(const PhantomSpec& spec) {
  for (int d = 0; d < 3; ++d) {
    if (spec.dims[d] <= 0) throw ValidationError("phantom dims must be positive");
    if (!(spec.spacing[d] > 0.0)) throw ValidationError("phantom spacing must be positive");
    if (!(spec.brain_axes[d] > 0.0)) throw ValidationError("brain semi-axes must be positive");
    const double lo = spec.brain_center[d] - spec.brain_axes[d];
    const double hi = spec.brain_center[d] + spec.brain_axes[d];
    if (lo < 0.0 || hi > spec.dims[d] - 1.0)
      throw ValidationError("brain ellipsoid exceeds volume dims along axis " +
                            std::to_string(d));
  }
  if (spec.noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
  if (spec.distractor_count < 0) throw ValidationError("distractor count must be >= 0");
  if (spec.distractor_radius_range[0] <= 0.0 ||
      spec.distractor_radius_range[1] < spec.distractor_radius_range[0])
    throw ValidationError("distractor radius range must satisfy 0 < lo <= hi");
  if (spec.bias_coeffs.size() > 9)
    throw ValidationError("at most 9 bias field coefficients are supported");
}

std::string to_json(const PhantomSpec& s) {
  json j;
  j["dims"] = s.dims;
  j["spacing"] = s.spacing;
  j["brain_center"] = s.brain_center;
  j["brain_axes"] = s.brain_axes;
  j["distractor_count"] = s.distractor_count;
  j["distractor_radius_range"] = s.distractor_radius_range;
  j["distractor_intensity"] = s.distractor_intensity;
  j["intensity_brain"] = s.intensity_brain;
  j["intensity_background"] = s.intensity_background;
  j["noise_sigma"] = s.noise_sigma;
  j["bias_coeffs"] = s.bias_coeffs;
  return j.dump(2);
}

PhantomSpec phantom_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid phantom spec JSON: ") + e.what());
  }
  PhantomSpec s;
  try {
    if (j.contains("dims")) j.at("dims").get_to(s.dims);
    if (j.contains("spacing")) j.at("spacing").get_to(s.spacing);
    if (j.contains("brain_center")) j.at("brain_center").get_to(s.brain_center);
    if (j.contains("brain_axes")) j.at("brain_axes").get_to(s.brain_axes);
    if (j.contains("distractor_count")) j.at("distractor_count").get_to(s.distractor_count);
    if (j.contains("distractor_radius_range"))
      j.at("distractor_radius_range").get_to(s.distractor_radius_range);
    if (j.contains("distractor_intensity"))
      j.at("distractor_intensity").get_to(s.distractor_intensity);
    if (j.contains("intensity_brain")) j.at("intensity_brain").get_to(s.intensity_brain);
    if (j.contains("intensity_background"))
      j.at("intensity_background").get_to(s.intensity_background);
    if (j.contains("noise_sigma")) j.at("noise_sigma").get_to(s.noise_sigma);
    if (j.contains("bias_coeffs")) j.at("bias_coeffs").get_to(s.bias_coeffs);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid phantom spec field: ") + e.what());
  }
  return s;
}

namespace {

inline bool inside_ellipsoid(double i, double j, double k, const std::array<double, 3>& c,
                             const std::array<double, 3>& a) {
  const double du = (i - c[0]) / a[0];
  const double dv = (j - c[1]) / a[1];
  const double dw = (k - c[2]) / a[2];
  return du * du + dv * dv + dw * dw <= 1.0;
}

// Voxels of an ellipsoid clipped to the volume, in scan order.
std::vector<std::array<int, 3>> ellipsoid_voxels(const std::array<double, 3>& c,
                                                 const std::array<double, 3>& a,
                                                 const std::array<int, 3>& dims) {
  std::vector<std::array<int, 3>> out;
  const int k0 = std::max(0, static_cast<int>(std::floor(c[2] - a[2])));
  const int k1 = std::min(dims[2] - 1, static_cast<int>(std::ceil(c[2] + a[2])));
  const int j0 = std::max(0, static_cast<int>(std::floor(c[1] - a[1])));
  const int j1 = std::min(dims[1] - 1, static_cast<int>(std::ceil(c[1] + a[1])));
  const int i0 = std::max(0, static_cast<int>(std::floor(c[0] - a[0])));
  const int i1 = std::min(dims[0] - 1, static_cast<int>(std::ceil(c[0] + a[0])));
  for (int k = k0; k <= k1; ++k)
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        if (inside_ellipsoid(i, j, k, c, a)) out.push_back({i, j, k});
  return out;
}

double bias_field_at(const std::vector<double>& coeffs, double u, double v, double w) {
  const double monomials[9] = {u, v, w, u * u, v * v, w * w, u * v, u * w, v * w};
  double f = 1.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) f += coeffs[i] * monomials[i];
  return f;
}

}  // namespace

std::pair<Volume, BinaryMask> generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  validate(spec);
  const auto& dims = spec.dims;
  Volume vol(dims[0], dims[1], dims[2], static_cast<float>(spec.intensity_background),
             spec.spacing);
  BinaryMask mask(dims[0], dims[1], dims[2], 0, spec.spacing);

  for (const auto& v : ellipsoid_voxels(spec.brain_center, spec.brain_axes, dims)) {
    mask.at(v[0], v[1], v[2]) = 1;
    vol.at(v[0], v[1], v[2]) = static_cast<float>(spec.intensity_brain);
  }

  Rng rng(seed);
  for (int d = 0; d < spec.distractor_count; ++d) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      std::array<double, 3> c{}, a{};
      for (int ax = 0; ax < 3; ++ax) c[ax] = rng.uniform(0.0, dims[ax] - 1.0);
      for (int ax = 0; ax < 3; ++ax)
        a[ax] = rng.uniform(spec.distractor_radius_range[0], spec.distractor_radius_range[1]);
      const auto voxels = ellipsoid_voxels(c, a, dims);
      if (voxels.empty()) continue;
      bool overlaps = false;
      for (const auto& v : voxels)
        if (mask.at(v[0], v[1], v[2])) { overlaps = true; break; }
      if (overlaps) continue;
      for (const auto& v : voxels)
        vol.at(v[0], v[1], v[2]) = static_cast<float>(spec.distractor_intensity);
      placed = true;
    }
    if (!placed)
      throw ValidationError("could not place distractor " + std::to_string(d) +
                            " without overlapping the brain ellipsoid");
  }

  if (!spec.bias_coeffs.empty()) {
    for (int k = 0; k < dims[2]; ++k) {
      const double w = dims[2] > 1 ? 2.0 * k / (dims[2] - 1.0) - 1.0 : 0.0;
      for (int j = 0; j < dims[1]; ++j) {
        const double v = dims[1] > 1 ? 2.0 * j / (dims[1] - 1.0) - 1.0 : 0.0;
        for (int i = 0; i < dims[0]; ++i) {
          const double u = dims[0] > 1 ? 2.0 * i / (dims[0] - 1.0) - 1.0 : 0.0;
          vol.at(i, j, k) *= static_cast<float>(bias_field_at(spec.bias_coeffs, u, v, w));
        }
      }
    }
  }

  if (spec.noise_sigma > 0.0) {
    for (float& x : vol.data) x += static_cast<float>(spec.noise_sigma * rng.normal());
  }
  return {std::move(vol), std::move(mask)};
}

}  // namespace autonet
