#pragma once

#include <array>
#include <optional>
#include <vector>

#include "autonet/tensor.hpp"
#include "autonet/volume.hpp"

namespace autonet {

// In-plane axes per plane: axial spans (i,j) at fixed k, coronal spans (i,k)
// at fixed j, sagittal spans (j,k) at fixed i. 2D arrays are stored with the
// first in-plane axis as columns (x/u) and the second as rows (y/v).
struct PlaneAxes {
  int u_axis, v_axis, normal_axis;
};
PlaneAxes plane_axes(Plane p);

struct PatchConfig {
  std::vector<int> sizes{15, 25, 51};
  std::vector<Plane> planes{Plane::axial, Plane::coronal, Plane::sagittal};
  bool with_context = false;
};

void validate(const PatchConfig& cfg);

// Previous-step brain posterior scaled by the working volume's mean
// intensity, so both input channels live on comparable scales.
struct ContextChannel {
  Volume values;
};

struct PosteriorVolume;  // posterior.hpp

ContextChannel assemble_context_channel(const PosteriorVolume& p, double mean);

// One multi-channel 2D window; data layout matches Tensor (v rows, u cols).
struct Patch2D {
  Plane plane;
  int size = 0;
  Tensor<float> data;  // n=1, h=size, w=size, c=channels
};

struct PatchSet {
  std::array<int, 3> center{};
  std::vector<Patch2D> patches;  // plane-major, then sizes in config order
};

// In-plane window centered at the voxel; out-of-bounds pixels are zero.
Tensor<float> extract_patch_2d(const Volume& v, std::array<int, 3> center, Plane plane,
                               int size);

PatchSet extract_patch_set(const Volume& v, const ContextChannel* ctx,
                           std::array<int, 3> center, const PatchConfig& cfg);

// Whole-volume slice stack for fully convolutional nets. Slices are padded
// with zeros at the high end to the next multiple of `pad_multiple`
// (1 = no padding); crop metadata records the original extent.
struct SliceStack {
  Plane plane;
  int width = 0, height = 0;          // unpadded (u, v) extent
  int padded_width = 0, padded_height = 0;
  std::vector<Tensor<float>> slices;  // one per index along the plane normal
};

SliceStack extract_slice_stack(const Volume& v, const ContextChannel* ctx, Plane plane,
                               int pad_multiple = 1);

// Inverse of extract_slice_stack for a chosen channel (crops the padding).
Volume volume_from_slices(const SliceStack& stack, std::array<int, 3> dims,
                          std::array<double, 3> spacing, int channel = 0);

}  // namespace autonet
