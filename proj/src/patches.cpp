#include "autonet/patches.hpp"

#include <algorithm>

#include "autonet/posterior.hpp"

namespace autonet {

PlaneAxes plane_axes(Plane p) {
  switch (p) {
    case Plane::axial: return {0, 1, 2};
    case Plane::coronal: return {0, 2, 1};
    case Plane::sagittal: return {1, 2, 0};
  }
  return {0, 1, 2};
}

void validate(const PatchConfig& cfg) {
  if (cfg.sizes.empty()) throw ValidationError("patch config needs at least one size");
  for (int s : cfg.sizes)
    if (s < 3 || s % 2 == 0)
      throw ValidationError("patch sizes must be odd and >= 3, got " + std::to_string(s));
  if (cfg.planes.empty()) throw ValidationError("patch config needs at least one plane");
}

ContextChannel assemble_context_channel(const PosteriorVolume& p, double mean) {
  ContextChannel ctx;
  ctx.values = Volume(p.dims[0], p.dims[1], p.dims[2], 0.0f, p.spacing);
  const std::size_t n = ctx.values.size();
  for (std::size_t i = 0; i < n; ++i)
    ctx.values.data[i] = static_cast<float>(p.prob(i, 1) * mean);
  return ctx;
}

namespace {

// Copies one in-plane window into channel `ch` of dst. Out-of-bounds reads
// become zeros (dst is pre-zeroed).
void fill_patch_channel(const Volume& v, std::array<int, 3> center, Plane plane, int size,
                        Tensor<float>& dst, int ch) {
  const PlaneAxes ax = plane_axes(plane);
  const int half = size / 2;
  std::array<int, 3> ijk = center;
  for (int py = 0; py < size; ++py) {
    ijk[ax.v_axis] = center[ax.v_axis] + py - half;
    if (ijk[ax.v_axis] < 0 || ijk[ax.v_axis] >= v.dims[ax.v_axis]) continue;
    for (int px = 0; px < size; ++px) {
      ijk[ax.u_axis] = center[ax.u_axis] + px - half;
      if (ijk[ax.u_axis] < 0 || ijk[ax.u_axis] >= v.dims[ax.u_axis]) continue;
      dst.at(0, py, px, ch) = v.at(ijk[0], ijk[1], ijk[2]);
    }
  }
}

}  // namespace

Tensor<float> extract_patch_2d(const Volume& v, std::array<int, 3> center, Plane plane,
                               int size) {
  if (size < 3 || size % 2 == 0)
    throw ValidationError("patch size must be odd and >= 3, got " + std::to_string(size));
  if (!v.contains(center[0], center[1], center[2]))
    throw ValidationError("patch center lies outside the volume");
  Tensor<float> patch(1, size, size, 1, 0.0f);
  fill_patch_channel(v, center, plane, size, patch, 0);
  return patch;
}

PatchSet extract_patch_set(const Volume& v, const ContextChannel* ctx,
                           std::array<int, 3> center, const PatchConfig& cfg) {
  validate(cfg);
  if (!v.contains(center[0], center[1], center[2]))
    throw ValidationError("patch center lies outside the volume");
  if (ctx && ctx->values.dims != v.dims)
    throw ValidationError("context channel dims do not match the volume");

  PatchSet set;
  set.center = center;
  const int channels = ctx ? 2 : 1;
  for (Plane plane : cfg.planes) {
    for (int size : cfg.sizes) {
      Patch2D p;
      p.plane = plane;
      p.size = size;
      p.data = Tensor<float>(1, size, size, channels, 0.0f);
      fill_patch_channel(v, center, plane, size, p.data, 0);
      if (ctx) fill_patch_channel(ctx->values, center, plane, size, p.data, 1);
      set.patches.push_back(std::move(p));
    }
  }
  return set;
}

SliceStack extract_slice_stack(const Volume& v, const ContextChannel* ctx, Plane plane,
                               int pad_multiple) {
  if (pad_multiple < 1) throw ValidationError("pad_multiple must be >= 1");
  if (ctx && ctx->values.dims != v.dims)
    throw ValidationError("context channel dims do not match the volume");
  const PlaneAxes ax = plane_axes(plane);

  SliceStack stack;
  stack.plane = plane;
  stack.width = v.dims[ax.u_axis];
  stack.height = v.dims[ax.v_axis];
  auto pad_to = [&](int x) { return ((x + pad_multiple - 1) / pad_multiple) * pad_multiple; };
  stack.padded_width = pad_to(stack.width);
  stack.padded_height = pad_to(stack.height);

  const int n_slices = v.dims[ax.normal_axis];
  const int channels = ctx ? 2 : 1;
  stack.slices.reserve(n_slices);
  for (int s = 0; s < n_slices; ++s) {
    Tensor<float> slice(1, stack.padded_height, stack.padded_width, channels, 0.0f);
    std::array<int, 3> ijk{};
    ijk[ax.normal_axis] = s;
    for (int py = 0; py < stack.height; ++py) {
      ijk[ax.v_axis] = py;
      for (int px = 0; px < stack.width; ++px) {
        ijk[ax.u_axis] = px;
        slice.at(0, py, px, 0) = v.at(ijk[0], ijk[1], ijk[2]);
        if (ctx) slice.at(0, py, px, 1) = ctx->values.at(ijk[0], ijk[1], ijk[2]);
      }
    }
    stack.slices.push_back(std::move(slice));
  }
  return stack;
}

Volume volume_from_slices(const SliceStack& stack, std::array<int, 3> dims,
                          std::array<double, 3> spacing, int channel) {
  const PlaneAxes ax = plane_axes(stack.plane);
  if (static_cast<int>(stack.slices.size()) != dims[ax.normal_axis])
    throw ValidationError("slice count does not match the requested dims");
  if (dims[ax.u_axis] != stack.width || dims[ax.v_axis] != stack.height)
    throw ValidationError("slice extent does not match the requested dims");

  Volume out(dims[0], dims[1], dims[2], 0.0f, spacing);
  for (int s = 0; s < static_cast<int>(stack.slices.size()); ++s) {
    const Tensor<float>& slice = stack.slices[s];
    std::array<int, 3> ijk{};
    ijk[ax.normal_axis] = s;
    for (int py = 0; py < stack.height; ++py) {
      ijk[ax.v_axis] = py;
      for (int px = 0; px < stack.width; ++px) {
        ijk[ax.u_axis] = px;
        out.at(ijk[0], ijk[1], ijk[2]) = slice.at(0, py, px, channel);
      }
    }
  }
  return out;
}

}  // namespace autonet
