#pragma once

#include <cstddef>
#include <vector>

namespace autonet {

// Dense (n, h, w, c) array, channel-fastest. The layout keeps each pixel's
// channel vector contiguous, which is what the GEMM-based convolutions want.
template <typename S>
struct Tensor {
  int n = 0, h = 0, w = 0, c = 0;
  std::vector<S> v;

  Tensor() = default;
  Tensor(int n_, int h_, int w_, int c_, S fill = S(0))
      : n(n_), h(h_), w(w_), c(c_),
        v(static_cast<std::size_t>(n_) * h_ * w_ * c_, fill) {}

  std::size_t size() const { return v.size(); }
  std::size_t pixels() const { return static_cast<std::size_t>(n) * h * w; }

  std::size_t index(int in, int iy, int ix, int ic) const {
    return ((static_cast<std::size_t>(in) * h + iy) * w + ix) * c + ic;
  }
  S& at(int in, int iy, int ix, int ic) { return v[index(in, iy, ix, ic)]; }
  S at(int in, int iy, int ix, int ic) const { return v[index(in, iy, ix, ic)]; }

  S* sample(int in) { return v.data() + static_cast<std::size_t>(in) * h * w * c; }
  const S* sample(int in) const { return v.data() + static_cast<std::size_t>(in) * h * w * c; }

  bool same_shape(const Tensor& o) const {
    return n == o.n && h == o.h && w == o.w && c == o.c;
  }

  template <typename T>
  Tensor<T> cast() const {
    Tensor<T> out(n, h, w, c);
    for (std::size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<T>(v[i]);
    return out;
  }
};

// Stacks same-shaped single tensors along n.
template <typename S>
Tensor<S> stack_tensors(const std::vector<const Tensor<S>*>& parts) {
  Tensor<S> out;
  if (parts.empty()) return out;
  const Tensor<S>& first = *parts.front();
  int total = 0;
  for (const auto* p : parts) total += p->n;
  out = Tensor<S>(total, first.h, first.w, first.c);
  std::size_t off = 0;
  for (const auto* p : parts) {
    std::copy(p->v.begin(), p->v.end(), out.v.begin() + off);
    off += p->v.size();
  }
  return out;
}

}  // namespace autonet
