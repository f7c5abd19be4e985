#include "autonet/posterior.hpp"

#include <cmath>

namespace autonet {

void validate(const PosteriorVolume& p, double tol) {
  if (p.classes < 2) throw ValidationError("posterior needs at least 2 classes");
  const std::size_t n = p.voxels();
  if (p.data.size() != n * p.classes)
    throw ValidationError("posterior data extent does not match dims");
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (int c = 0; c < p.classes; ++c) {
      const float x = p.prob(v, c);
      if (!(x >= 0.0f) || !std::isfinite(x))
        throw ValidationError("posterior probabilities must be finite and >= 0");
      s += x;
    }
    if (std::abs(s - 1.0) > tol)
      throw ValidationError("posterior probabilities must sum to 1 per voxel");
  }
}

void save_posterior(const PosteriorVolume& p, const std::string& path) {
  if (p.classes != 2)
    throw ValidationError("posterior files store two-class posteriors only");
  Volume fg(p.dims[0], p.dims[1], p.dims[2], 0.0f, p.spacing);
  for (std::size_t v = 0; v < p.voxels(); ++v) fg.data[v] = p.prob(v, 1);
  save_volume(fg, path);
}

PosteriorVolume load_posterior(const std::string& path) {
  const Volume fg = load_volume(path).volume;
  PosteriorVolume p(fg.dims, 2, fg.spacing);
  for (std::size_t v = 0; v < p.voxels(); ++v) {
    float q = fg.data[v];
    if (q < 0.0f) q = 0.0f;
    if (q > 1.0f) q = 1.0f;
    p.prob(v, 1) = q;
    p.prob(v, 0) = 1.0f - q;
  }
  return p;
}

}  // namespace autonet
