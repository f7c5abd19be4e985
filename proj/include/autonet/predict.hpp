#pragma once

#include <array>
#include <vector>

#include "autonet/graph.hpp"
#include "autonet/patches.hpp"
#include "autonet/posterior.hpp"

namespace autonet {

// log(1-q), log(q) with q clamped away from {0,1}.
std::array<float, 2> log_prior_pair(float q);

// Posterior vectors at the requested voxels, true sliding-window evaluation
// (one patch set per voxel, batched). Independent of batch partitioning.
std::vector<std::array<float, 2>> predict_voxelwise(
    const VoxelwiseNet& net, Model& model, const Volume& vol, const ContextChannel* ctx,
    const PosteriorVolume* prior, const std::vector<std::array<int, 3>>& voxels,
    int batch_size = 64);

// Whole-volume posterior by running each 2D pathway over whole zero-padded
// slices (the fully convolutional evaluation). Must agree with the sliding
// window within 1e-5.
PosteriorVolume predict_voxelwise_dense(const VoxelwiseNet& net, Model& model,
                                        const Volume& vol, const ContextChannel* ctx,
                                        const PosteriorVolume* prior);

// Whole-volume posterior from per-slice fully convolutional evaluation;
// padding introduced for the pooling levels is cropped back.
PosteriorVolume predict_unet(const UnetNet& net, Model& model, const Volume& vol,
                             const ContextChannel* ctx, const PosteriorVolume* prior,
                             Plane plane, int batch_size = 8);

}  // namespace autonet
