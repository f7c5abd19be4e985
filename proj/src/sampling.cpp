#include "autonet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "autonet/rng.hpp"

namespace autonet {

using nlohmann::json;

const char* stratum_name(Stratum s) {
  switch (s) {
    case Stratum::border: return "border";
    case Stratum::brain: return "brain";
    case Stratum::nonbrain: return "nonbrain";
  }
  return "?";
}

BinaryMask border_mask(const BinaryMask& m, int cube) {
  validate(m);
  if (cube < 3 || cube % 2 == 0)
    throw ValidationError("border cube size must be odd and >= 3, got " + std::to_string(cube));
  const int nx = m.nx(), ny = m.ny(), nz = m.nz();
  const int r = cube / 2;

  // Summed-volume table over the mask: ones(i,j,k) = sum of m over
  // [0..i)x[0..j)x[0..k). Box sums then cost O(1) per voxel.
  const std::size_t sx = nx + 1, sy = ny + 1, sz = nz + 1;
  std::vector<std::int64_t> sat(sx * sy * sz, 0);
  auto sat_at = [&](int i, int j, int k) -> std::int64_t& {
    return sat[static_cast<std::size_t>(i) + sx * (static_cast<std::size_t>(j) + sy * k)];
  };
  for (int k = 1; k < static_cast<int>(sz); ++k)
    for (int j = 1; j < static_cast<int>(sy); ++j)
      for (int i = 1; i < static_cast<int>(sx); ++i) {
        sat_at(i, j, k) = static_cast<std::int64_t>(m.at(i - 1, j - 1, k - 1)) +
                          sat_at(i - 1, j, k) + sat_at(i, j - 1, k) + sat_at(i, j, k - 1) -
                          sat_at(i - 1, j - 1, k) - sat_at(i - 1, j, k - 1) -
                          sat_at(i, j - 1, k - 1) + sat_at(i - 1, j - 1, k - 1);
      }
  auto box_ones = [&](int i0, int j0, int k0, int i1, int j1, int k1) {
    // inclusive box [i0..i1]x[j0..j1]x[k0..k1]
    return sat_at(i1 + 1, j1 + 1, k1 + 1) - sat_at(i0, j1 + 1, k1 + 1) -
           sat_at(i1 + 1, j0, k1 + 1) - sat_at(i1 + 1, j1 + 1, k0) + sat_at(i0, j0, k1 + 1) +
           sat_at(i0, j1 + 1, k0) + sat_at(i1 + 1, j0, k0) - sat_at(i0, j0, k0);
  };

  BinaryMask out(nx, ny, nz, 0, m.spacing);
  for (int k = 0; k < nz; ++k) {
    const int k0 = std::max(0, k - r), k1 = std::min(nz - 1, k + r);
    for (int j = 0; j < ny; ++j) {
      const int j0 = std::max(0, j - r), j1 = std::min(ny - 1, j + r);
      for (int i = 0; i < nx; ++i) {
        const int i0 = std::max(0, i - r), i1 = std::min(nx - 1, i + r);
        const std::int64_t ones = box_ones(i0, j0, k0, i1, j1, k1);
        const std::int64_t count = static_cast<std::int64_t>(i1 - i0 + 1) * (j1 - j0 + 1) *
                                   (k1 - k0 + 1);
        out.at(i, j, k) = (ones > 0 && ones < count) ? 1 : 0;
      }
    }
  }
  return out;
}

std::array<int, 3> SamplingPlan::stratum_counts() const {
  std::array<int, 3> c{0, 0, 0};
  for (Stratum s : strata) ++c[static_cast<int>(s)];
  return c;
}

std::array<int, 3> stratum_quotas(int total, std::array<double, 3> fractions) {
  const double fsum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(fsum - 1.0) > 1e-9)
    throw ValidationError("stratum fractions must sum to 1");
  for (double f : fractions)
    if (f < 0.0) throw ValidationError("stratum fractions must be nonnegative");
  if (total < 0) throw ValidationError("total must be nonnegative");

  std::array<int, 3> quota{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = total * fractions[s];
    quota[s] = static_cast<int>(std::floor(exact));
    remainder[s] = exact - quota[s];
    assigned += quota[s];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int s = 0; assigned < total; ++s, ++assigned) ++quota[order[s % 3]];
  return quota;
}

SamplingPlan sample_training_voxels(const BinaryMask& m, int total,
                                    std::array<double, 3> fractions, std::uint64_t seed,
                                    int border_cube) {
  const BinaryMask border = border_mask(m, border_cube);
  const auto quota = stratum_quotas(total, fractions);

  // Stratum populations in scan order (k-major, x-fastest).
  std::array<std::vector<std::array<int, 3>>, 3> pool;
  for (int k = 0; k < m.nz(); ++k)
    for (int j = 0; j < m.ny(); ++j)
      for (int i = 0; i < m.nx(); ++i) {
        if (border.at(i, j, k))
          pool[0].push_back({i, j, k});
        else if (m.at(i, j, k))
          pool[1].push_back({i, j, k});
        else
          pool[2].push_back({i, j, k});
      }

  SamplingPlan plan;
  plan.seed = seed;
  plan.per_image_total = total;
  plan.fractions = fractions;
  plan.voxels.reserve(total);
  plan.strata.reserve(total);
  plan.labels.reserve(total);

  auto emit = [&](const std::array<int, 3>& v, Stratum s) {
    plan.voxels.push_back(v);
    plan.strata.push_back(s);
    plan.labels.push_back(m.at(v[0], v[1], v[2]));
  };

  Rng rng(seed);
  for (int s = 0; s < 3; ++s) {
    auto& candidates = pool[s];
    const int want = quota[s];
    if (want == 0) continue;
    if (candidates.empty())
      throw ValidationError(std::string("stratum '") + stratum_name(Stratum(s)) +
                            "' is empty but its quota is " + std::to_string(want));

    const int n = static_cast<int>(candidates.size());
    // Partial Fisher-Yates: the first min(want, n) slots become a uniform
    // draw without replacement.
    const int head = std::min(want, n);
    for (int t = 0; t < head; ++t) {
      const int u = static_cast<int>(rng.uniform_int(t, n - 1));
      std::swap(candidates[t], candidates[u]);
    }
    for (int t = 0; t < head; ++t) emit(candidates[t], Stratum(s));
    for (int t = head; t < want; ++t) {
      const int u = static_cast<int>(rng.uniform_int(0, n - 1));
      emit(candidates[u], Stratum(s));
    }
  }
  return plan;
}

std::string to_json(const SamplingPlan& plan) {
  json j;
  j["seed"] = plan.seed;
  j["per_image_total"] = plan.per_image_total;
  j["fractions"] = plan.fractions;
  json voxels = json::array();
  for (std::size_t i = 0; i < plan.voxels.size(); ++i) {
    voxels.push_back({{"ijk", plan.voxels[i]},
                      {"stratum", stratum_name(plan.strata[i])},
                      {"label", static_cast<int>(plan.labels[i])}});
  }
  j["voxels"] = std::move(voxels);
  return j.dump();
}

SamplingPlan sampling_plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid sampling plan JSON: ") + e.what());
  }
  SamplingPlan plan;
  try {
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.per_image_total = j.at("per_image_total").get<int>();
    j.at("fractions").get_to(plan.fractions);
    for (const auto& v : j.at("voxels")) {
      std::array<int, 3> ijk{};
      v.at("ijk").get_to(ijk);
      plan.voxels.push_back(ijk);
      const std::string s = v.at("stratum").get<std::string>();
      if (s == "border")
        plan.strata.push_back(Stratum::border);
      else if (s == "brain")
        plan.strata.push_back(Stratum::brain);
      else if (s == "nonbrain")
        plan.strata.push_back(Stratum::nonbrain);
      else
        throw ValidationError("unknown stratum tag: " + s);
      plan.labels.push_back(static_cast<std::uint8_t>(v.at("label").get<int>()));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid sampling plan field: ") + e.what());
  }
  return plan;
}

}  // namespace autonet
