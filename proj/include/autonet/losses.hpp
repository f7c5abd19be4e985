#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "autonet/posterior.hpp"
#include "autonet/tensor.hpp"

namespace autonet {

// Probability floor used when taking logs of predicted posteriors.
constexpr double kLogProbFloor = 1e-12;

// Numerically stabilized softmax (max subtraction). Double precision: the
// identity softmax(log p) == p must hold to ~1e-9.
std::vector<double> softmax(const std::vector<double>& logits);

// Total cross-entropy -sum_i log p_i(true label) over sampled positions.
// probs is position-major, class-fastest (size = labels.size() * classes).
double cross_entropy(const std::vector<double>& probs, int classes,
                     const std::vector<int>& labels);

// Per-voxel mean of -log p(true label); the cascade's normalized cost.
double mean_cross_entropy(const PosteriorVolume& p, const BinaryMask& labels);

// w_c = 1 / (C * freq_c): inversely proportional to class frequency and
// normalized so that sum_c w_c * freq_c = 1.
std::vector<double> class_weights(const std::vector<double>& frequencies);

// Weighted mean over pixels of per-pixel cross-entropy on a logit map;
// each pixel weighs by its true class weight.
double weighted_slice_loss(const Tensor<float>& logits, const std::vector<std::uint8_t>& labels,
                           const std::vector<double>& weights);

// Fused softmax cross-entropy for training: loss plus d(loss)/d(logits).
// logits: (n, h, w, classes); labels: n*h*w entries; offset (optional) is
// added to the logits before the softmax (the cascade's log-prior bypass).
// Loss = (1/P) * sum w_y * (-log softmax_y), P = total pixel count.
template <typename S>
double softmax_ce_loss_grad(const Tensor<S>& logits, const std::vector<std::uint8_t>& labels,
                            const std::vector<double>& weights, const Tensor<S>* offset,
                            Tensor<S>& dlogits) {
  const int C = logits.c;
  const std::size_t P = logits.pixels();
  dlogits = Tensor<S>(logits.n, logits.h, logits.w, logits.c);
  double loss = 0.0;
  const double inv_p = 1.0 / static_cast<double>(P);
  std::vector<double> z(C);
  for (std::size_t p = 0; p < P; ++p) {
    double zmax = -1e300;
    for (int c = 0; c < C; ++c) {
      z[c] = static_cast<double>(logits.v[p * C + c]);
      if (offset) z[c] += static_cast<double>(offset->v[p * C + c]);
      zmax = std::max(zmax, z[c]);
    }
    double denom = 0.0;
    for (int c = 0; c < C; ++c) denom += std::exp(z[c] - zmax);
    const int y = labels[p];
    const double w = weights.empty() ? 1.0 : weights[y];
    const double log_py = z[y] - zmax - std::log(denom);
    loss -= w * log_py;
    for (int c = 0; c < C; ++c) {
      const double softmax_c = std::exp(z[c] - zmax) / denom;
      const double onehot = c == y ? 1.0 : 0.0;
      dlogits.v[p * C + c] = static_cast<S>(w * (softmax_c - onehot) * inv_p);
    }
  }
  return loss * inv_p;
}

// Converts a logit tensor to per-pixel probabilities in place-compatible
// fashion (used by the predictors).
template <typename S>
void softmax_rows(Tensor<S>& logits) {
  const int C = logits.c;
  const std::size_t P = logits.pixels();
  for (std::size_t p = 0; p < P; ++p) {
    S* row = logits.v.data() + p * C;
    S zmax = row[0];
    for (int c = 1; c < C; ++c) zmax = std::max(zmax, row[c]);
    double denom = 0.0;
    for (int c = 0; c < C; ++c) denom += std::exp(static_cast<double>(row[c] - zmax));
    for (int c = 0; c < C; ++c)
      row[c] = static_cast<S>(std::exp(static_cast<double>(row[c] - zmax)) / denom);
  }
}

}  // namespace autonet
