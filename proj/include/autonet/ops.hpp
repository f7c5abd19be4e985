#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "autonet/common.hpp"
#include "autonet/tensor.hpp"

namespace autonet {

enum class Padding { valid, same };

// Kernel weights are stored GEMM-ready: w[((dy*kw + dx)*in_c + ci)*out_c + co],
// biases b[co]. "same" padding keeps the spatial extent (odd kernels only);
// "valid" shrinks it by k-1.

namespace ops {

template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapM = Eigen::Map<MatRM<S>>;
template <typename S>
using MapCM = Eigen::Map<const MatRM<S>>;

inline int conv_out_extent(int in, int k, Padding pad) {
  return pad == Padding::same ? in : in - k + 1;
}

inline int conv_pad(int k, Padding pad) { return pad == Padding::same ? (k - 1) / 2 : 0; }

// Rows of the patch matrix for output rows [y0, y1) of one sample.
template <typename S>
void im2col_rows(const Tensor<S>& in, int sample, int kh, int kw, int pad, int out_w, int y0,
                 int y1, std::vector<S>& cols) {
  const int K = kh * kw * in.c;
  cols.assign(static_cast<std::size_t>(y1 - y0) * out_w * K, S(0));
  const S* src = in.sample(sample);
  for (int y = y0; y < y1; ++y) {
    S* row_base = cols.data() + static_cast<std::size_t>(y - y0) * out_w * K;
    for (int dy = 0; dy < kh; ++dy) {
      const int iy = y + dy - pad;
      if (iy < 0 || iy >= in.h) continue;
      for (int dx = 0; dx < kw; ++dx) {
        const int x_lo = std::max(0, pad - dx);
        const int x_hi = std::min(out_w, in.w + pad - dx);
        const std::size_t col_off = (static_cast<std::size_t>(dy) * kw + dx) * in.c;
        for (int x = x_lo; x < x_hi; ++x) {
          const S* px = src + (static_cast<std::size_t>(iy) * in.w + (x + dx - pad)) * in.c;
          std::copy(px, px + in.c, row_base + static_cast<std::size_t>(x) * K + col_off);
        }
      }
    }
  }
}

// Scatter-add of patch-matrix gradients back onto the input (adjoint of
// im2col_rows).
template <typename S>
void col2im_rows(Tensor<S>& din, int sample, int kh, int kw, int pad, int out_w, int y0, int y1,
                 const std::vector<S>& cols) {
  const int K = kh * kw * din.c;
  S* dst = din.sample(sample);
  for (int y = y0; y < y1; ++y) {
    const S* row_base = cols.data() + static_cast<std::size_t>(y - y0) * out_w * K;
    for (int dy = 0; dy < kh; ++dy) {
      const int iy = y + dy - pad;
      if (iy < 0 || iy >= din.h) continue;
      for (int dx = 0; dx < kw; ++dx) {
        const int x_lo = std::max(0, pad - dx);
        const int x_hi = std::min(out_w, din.w + pad - dx);
        const std::size_t col_off = (static_cast<std::size_t>(dy) * kw + dx) * din.c;
        for (int x = x_lo; x < x_hi; ++x) {
          S* px = dst + (static_cast<std::size_t>(iy) * din.w + (x + dx - pad)) * din.c;
          const S* g = row_base + static_cast<std::size_t>(x) * K + col_off;
          for (int ci = 0; ci < din.c; ++ci) px[ci] += g[ci];
        }
      }
    }
  }
}

// Output rows processed per GEMM chunk, sized to keep the patch matrix small.
inline int conv_chunk_rows(int out_w, int K) {
  const std::size_t cap = std::size_t(1) << 21;  // ~2M elements
  const std::size_t per_row = static_cast<std::size_t>(out_w) * K;
  return std::max<int>(1, static_cast<int>(cap / std::max<std::size_t>(per_row, 1)));
}

template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& in, const std::vector<S>& w, const std::vector<S>& b,
                         int kh, int kw, int out_c, Padding padding) {
  const int pad = conv_pad(kh, padding);
  const int oh = conv_out_extent(in.h, kh, padding);
  const int ow = conv_out_extent(in.w, kw, padding);
  if (oh < 1 || ow < 1)
    throw ValidationError("convolution kernel larger than its input (" + std::to_string(in.h) +
                          "x" + std::to_string(in.w) + " vs " + std::to_string(kh) + "x" +
                          std::to_string(kw) + ")");
  const int K = kh * kw * in.c;
  Tensor<S> out(in.n, oh, ow, out_c);
  MapCM<S> W(w.data(), K, out_c);
  Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>> bias(b.data(), out_c);

  if (kh == 1 && kw == 1) {
    MapCM<S> A(in.v.data(), static_cast<Eigen::Index>(in.pixels()), in.c);
    MapM<S> C(out.v.data(), static_cast<Eigen::Index>(out.pixels()), out_c);
    C.noalias() = A * W;
    C.rowwise() += bias;
    return out;
  }

  thread_local std::vector<S> cols;
  const int chunk = conv_chunk_rows(ow, K);
  for (int s = 0; s < in.n; ++s) {
    for (int y0 = 0; y0 < oh; y0 += chunk) {
      const int y1 = std::min(oh, y0 + chunk);
      im2col_rows(in, s, kh, kw, pad, ow, y0, y1, cols);
      const Eigen::Index rows = static_cast<Eigen::Index>(y1 - y0) * ow;
      MapCM<S> A(cols.data(), rows, K);
      MapM<S> C(out.sample(s) + static_cast<std::size_t>(y0) * ow * out_c, rows, out_c);
      C.noalias() = A * W;
      C.rowwise() += bias;
    }
  }
  return out;
}

// Accumulates dw/db; din is zero-initialized here.
template <typename S>
void conv2d_backward(const Tensor<S>& in, const std::vector<S>& w, const Tensor<S>& dout,
                     int kh, int kw, int out_c, Padding padding, Tensor<S>& din,
                     std::vector<S>& dw, std::vector<S>& db) {
  const int pad = conv_pad(kh, padding);
  const int oh = dout.h, ow = dout.w;
  const int K = kh * kw * in.c;
  din = Tensor<S>(in.n, in.h, in.w, in.c);
  dw.assign(w.size(), S(0));
  db.assign(out_c, S(0));

  MapCM<S> W(w.data(), K, out_c);
  MapM<S> dW(dw.data(), K, out_c);
  Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>> dB(db.data(), out_c);

  if (kh == 1 && kw == 1) {
    MapCM<S> A(in.v.data(), static_cast<Eigen::Index>(in.pixels()), in.c);
    MapCM<S> G(dout.v.data(), static_cast<Eigen::Index>(dout.pixels()), out_c);
    MapM<S> dA(din.v.data(), static_cast<Eigen::Index>(din.pixels()), in.c);
    dW.noalias() = A.transpose() * G;
    dB = G.colwise().sum();
    dA.noalias() = G * W.transpose();
    return;
  }

  thread_local std::vector<S> cols, dcols;
  const int chunk = conv_chunk_rows(ow, K);
  for (int s = 0; s < in.n; ++s) {
    for (int y0 = 0; y0 < oh; y0 += chunk) {
      const int y1 = std::min(oh, y0 + chunk);
      const Eigen::Index rows = static_cast<Eigen::Index>(y1 - y0) * ow;
      im2col_rows(in, s, kh, kw, pad, ow, y0, y1, cols);
      MapCM<S> A(cols.data(), rows, K);
      MapCM<S> G(dout.sample(s) + static_cast<std::size_t>(y0) * ow * out_c, rows, out_c);
      dW.noalias() += A.transpose() * G;
      dB += G.colwise().sum();
      dcols.assign(static_cast<std::size_t>(rows) * K, S(0));
      MapM<S> dA(dcols.data(), rows, K);
      dA.noalias() = G * W.transpose();
      col2im_rows(din, s, kh, kw, pad, ow, y0, y1, dcols);
    }
  }
}

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& in) {
  Tensor<S> out = in;
  for (S& x : out.v) x = x > S(0) ? x : S(0);
  return out;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& out, const Tensor<S>& dout) {
  Tensor<S> din = dout;
  for (std::size_t i = 0; i < din.v.size(); ++i)
    if (!(out.v[i] > S(0))) din.v[i] = S(0);
  return din;
}

template <typename S>
Tensor<S> scale_forward(const Tensor<S>& in, double factor) {
  Tensor<S> out = in;
  const S f = static_cast<S>(factor);
  for (S& x : out.v) x *= f;
  return out;
}

template <typename S>
Tensor<S> scale_backward(const Tensor<S>& dout, double factor) {
  return scale_forward(dout, factor);
}

constexpr double kBatchNormEps = 1e-5;
constexpr double kBatchNormMomentum = 0.9;

// Batch statistics are taken over (n, h, w) per channel. Saved mean/invstd
// and normalized activations feed the backward pass; running statistics
// serve eval mode.
template <typename S>
Tensor<S> batchnorm_forward_train(const Tensor<S>& in, const std::vector<S>& gamma,
                                  const std::vector<S>& beta, std::vector<S>& running_mean,
                                  std::vector<S>& running_var, std::vector<S>& saved_mean,
                                  std::vector<S>& saved_invstd, Tensor<S>& saved_xhat) {
  const int C = in.c;
  const std::size_t m = in.pixels();
  saved_mean.assign(C, S(0));
  saved_invstd.assign(C, S(0));
  std::vector<double> mean(C, 0.0), var(C, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (int ci = 0; ci < C; ++ci) mean[ci] += in.v[p * C + ci];
  for (int ci = 0; ci < C; ++ci) mean[ci] /= static_cast<double>(m);
  for (std::size_t p = 0; p < m; ++p)
    for (int ci = 0; ci < C; ++ci) {
      const double d = in.v[p * C + ci] - mean[ci];
      var[ci] += d * d;
    }
  for (int ci = 0; ci < C; ++ci) var[ci] /= static_cast<double>(m);

  saved_xhat = Tensor<S>(in.n, in.h, in.w, in.c);
  Tensor<S> out(in.n, in.h, in.w, in.c);
  for (int ci = 0; ci < C; ++ci) {
    const double invstd = 1.0 / std::sqrt(var[ci] + kBatchNormEps);
    saved_mean[ci] = static_cast<S>(mean[ci]);
    saved_invstd[ci] = static_cast<S>(invstd);
    running_mean[ci] = static_cast<S>(kBatchNormMomentum * running_mean[ci] +
                                      (1.0 - kBatchNormMomentum) * mean[ci]);
    running_var[ci] = static_cast<S>(kBatchNormMomentum * running_var[ci] +
                                     (1.0 - kBatchNormMomentum) * var[ci]);
  }
  for (std::size_t p = 0; p < m; ++p)
    for (int ci = 0; ci < C; ++ci) {
      const S xhat = (in.v[p * C + ci] - saved_mean[ci]) * saved_invstd[ci];
      saved_xhat.v[p * C + ci] = xhat;
      out.v[p * C + ci] = gamma[ci] * xhat + beta[ci];
    }
  return out;
}

template <typename S>
Tensor<S> batchnorm_forward_eval(const Tensor<S>& in, const std::vector<S>& gamma,
                                 const std::vector<S>& beta,
                                 const std::vector<S>& running_mean,
                                 const std::vector<S>& running_var) {
  const int C = in.c;
  Tensor<S> out(in.n, in.h, in.w, in.c);
  std::vector<S> a(C), b(C);
  for (int ci = 0; ci < C; ++ci) {
    const S invstd = static_cast<S>(1.0 / std::sqrt(static_cast<double>(running_var[ci]) +
                                                    kBatchNormEps));
    a[ci] = gamma[ci] * invstd;
    b[ci] = beta[ci] - a[ci] * running_mean[ci];
  }
  const std::size_t m = in.pixels();
  for (std::size_t p = 0; p < m; ++p)
    for (int ci = 0; ci < C; ++ci) out.v[p * C + ci] = a[ci] * in.v[p * C + ci] + b[ci];
  return out;
}

template <typename S>
Tensor<S> batchnorm_backward(const Tensor<S>& dout, const std::vector<S>& gamma,
                             const std::vector<S>& saved_invstd, const Tensor<S>& saved_xhat,
                             std::vector<S>& dgamma, std::vector<S>& dbeta) {
  const int C = dout.c;
  const std::size_t m = dout.pixels();
  dgamma.assign(C, S(0));
  dbeta.assign(C, S(0));
  std::vector<double> sum_dy(C, 0.0), sum_dy_xhat(C, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (int ci = 0; ci < C; ++ci) {
      const double dy = dout.v[p * C + ci];
      sum_dy[ci] += dy;
      sum_dy_xhat[ci] += dy * saved_xhat.v[p * C + ci];
    }
  for (int ci = 0; ci < C; ++ci) {
    dgamma[ci] = static_cast<S>(sum_dy_xhat[ci]);
    dbeta[ci] = static_cast<S>(sum_dy[ci]);
  }
  Tensor<S> din(dout.n, dout.h, dout.w, dout.c);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t p = 0; p < m; ++p)
    for (int ci = 0; ci < C; ++ci) {
      const double dy = dout.v[p * C + ci];
      const double term = dy - inv_m * sum_dy[ci] -
                          inv_m * sum_dy_xhat[ci] * saved_xhat.v[p * C + ci];
      din.v[p * C + ci] = static_cast<S>(gamma[ci] * saved_invstd[ci] * term);
    }
  return din;
}

template <typename S>
Tensor<S> maxpool2_forward(const Tensor<S>& in, std::vector<std::int32_t>& argmax) {
  if (in.h % 2 != 0 || in.w % 2 != 0)
    throw ValidationError("maxpool2 needs even spatial dims, got " + std::to_string(in.h) +
                          "x" + std::to_string(in.w));
  Tensor<S> out(in.n, in.h / 2, in.w / 2, in.c);
  argmax.assign(out.size(), 0);
  for (int s = 0; s < in.n; ++s)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x)
        for (int ci = 0; ci < in.c; ++ci) {
          S best = in.at(s, 2 * y, 2 * x, ci);
          std::int32_t best_idx = static_cast<std::int32_t>(in.index(s, 2 * y, 2 * x, ci));
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const S val = in.at(s, 2 * y + dy, 2 * x + dx, ci);
              if (val > best) {
                best = val;
                best_idx = static_cast<std::int32_t>(in.index(s, 2 * y + dy, 2 * x + dx, ci));
              }
            }
          out.at(s, y, x, ci) = best;
          argmax[out.index(s, y, x, ci)] = best_idx;
        }
  return out;
}

template <typename S>
Tensor<S> maxpool2_backward(const Tensor<S>& dout, const std::vector<std::int32_t>& argmax,
                            int in_h, int in_w) {
  Tensor<S> din(dout.n, in_h, in_w, dout.c);
  for (std::size_t i = 0; i < dout.v.size(); ++i) din.v[argmax[i]] += dout.v[i];
  return din;
}

template <typename S>
Tensor<S> upsample2_forward(const Tensor<S>& in) {
  Tensor<S> out(in.n, in.h * 2, in.w * 2, in.c);
  for (int s = 0; s < in.n; ++s)
    for (int y = 0; y < out.h; ++y) {
      const int sy = y / 2;
      for (int x = 0; x < out.w; ++x) {
        const S* src = &in.v[in.index(s, sy, x / 2, 0)];
        S* dst = &out.v[out.index(s, y, x, 0)];
        std::copy(src, src + in.c, dst);
      }
    }
  return out;
}

template <typename S>
Tensor<S> upsample2_backward(const Tensor<S>& dout) {
  Tensor<S> din(dout.n, dout.h / 2, dout.w / 2, dout.c);
  for (int s = 0; s < dout.n; ++s)
    for (int y = 0; y < dout.h; ++y)
      for (int x = 0; x < dout.w; ++x) {
        const S* g = &dout.v[dout.index(s, y, x, 0)];
        S* dst = &din.v[din.index(s, y / 2, x / 2, 0)];
        for (int ci = 0; ci < dout.c; ++ci) dst[ci] += g[ci];
      }
  return din;
}

template <typename S>
Tensor<S> concat_forward(const std::vector<const Tensor<S>*>& parts) {
  int total_c = 0;
  for (const auto* p : parts) {
    if (p->n != parts[0]->n || p->h != parts[0]->h || p->w != parts[0]->w)
      throw ValidationError("concat inputs must share (n, h, w)");
    total_c += p->c;
  }
  Tensor<S> out(parts[0]->n, parts[0]->h, parts[0]->w, total_c);
  const std::size_t m = out.pixels();
  for (std::size_t p = 0; p < m; ++p) {
    S* dst = out.v.data() + p * total_c;
    for (const auto* part : parts) {
      const S* src = part->v.data() + p * part->c;
      std::copy(src, src + part->c, dst);
      dst += part->c;
    }
  }
  return out;
}

template <typename S>
std::vector<Tensor<S>> concat_backward(const Tensor<S>& dout,
                                       const std::vector<const Tensor<S>*>& parts) {
  std::vector<Tensor<S>> dins;
  dins.reserve(parts.size());
  for (const auto* p : parts) dins.emplace_back(p->n, p->h, p->w, p->c);
  const std::size_t m = dout.pixels();
  for (std::size_t p = 0; p < m; ++p) {
    const S* src = dout.v.data() + p * dout.c;
    for (auto& din : dins) {
      S* dst = din.v.data() + p * din.c;
      std::copy(src, src + din.c, dst);
      src += din.c;
    }
  }
  return dins;
}

}  // namespace ops
}  // namespace autonet
