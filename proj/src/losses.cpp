#include "autonet/losses.hpp"

#include "autonet/common.hpp"

namespace autonet {

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw ValidationError("softmax of an empty vector");
  for (double z : logits)
    if (!std::isfinite(z)) throw ValidationError("softmax requires finite logits");
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - zmax);
    denom += out[i];
  }
  for (double& x : out) x /= denom;
  return out;
}

double cross_entropy(const std::vector<double>& probs, int classes,
                     const std::vector<int>& labels) {
  if (classes < 2) throw ValidationError("cross_entropy needs at least 2 classes");
  if (probs.size() != labels.size() * static_cast<std::size_t>(classes))
    throw ValidationError("cross_entropy: probs extent does not match labels");
  double h = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= classes) throw ValidationError("cross_entropy: label out of range");
    h -= std::log(std::max(probs[i * classes + y], kLogProbFloor));
  }
  return h;
}

double mean_cross_entropy(const PosteriorVolume& p, const BinaryMask& labels) {
  if (p.dims != labels.dims)
    throw ValidationError("mean_cross_entropy: posterior and label dims differ");
  const std::size_t n = p.voxels();
  double h = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double py = p.prob(v, labels.data[v]);
    h -= std::log(std::max(py, kLogProbFloor));
  }
  return h / static_cast<double>(n);
}

std::vector<double> class_weights(const std::vector<double>& frequencies) {
  if (frequencies.size() < 2) throw ValidationError("class_weights needs >= 2 classes");
  double total = 0.0;
  for (std::size_t c = 0; c < frequencies.size(); ++c) {
    if (frequencies[c] <= 0.0)
      throw ValidationError("empty class: frequency of class " + std::to_string(c) +
                            " is not positive");
    total += frequencies[c];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("class frequencies must sum to 1");
  const double k = 1.0 / static_cast<double>(frequencies.size());
  std::vector<double> w(frequencies.size());
  for (std::size_t c = 0; c < frequencies.size(); ++c) w[c] = k / frequencies[c];
  return w;
}

double weighted_slice_loss(const Tensor<float>& logits, const std::vector<std::uint8_t>& labels,
                           const std::vector<double>& weights) {
  if (labels.size() != logits.pixels())
    throw ValidationError("weighted_slice_loss: label extent does not match logits");
  if (!weights.empty() && static_cast<int>(weights.size()) != logits.c)
    throw ValidationError("weighted_slice_loss: weight count does not match classes");
  Tensor<float> scratch;
  return softmax_ce_loss_grad(logits, labels, weights, nullptr, scratch);
}

}  // namespace autonet
