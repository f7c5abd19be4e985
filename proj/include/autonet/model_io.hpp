#pragma once

#include <string>

#include "autonet/network.hpp"

namespace autonet {

enum class ArchKind { voxelwise, unet };

const char* arch_kind_name(ArchKind k);
ArchKind arch_kind_from_name(const std::string& name);

// One trained classifier of the cascade: architecture wrapper + parameters.
struct StepModel {
  ArchKind kind = ArchKind::voxelwise;
  VoxelwiseNet vox;
  UnetNet unet;
  Plane unet_plane = Plane::axial;
  Model model;

  const NetworkSpec& spec() const { return kind == ArchKind::voxelwise ? vox.spec : unet.spec; }
  int in_channels() const {
    return kind == ArchKind::voxelwise ? vox.in_channels : unet.in_channels;
  }
};

// Writes <dir>/model.json (graph, shapes, array table, metadata) and
// <dir>/model.bin (float32 little-endian arrays in table order).
void save_step_model(const std::string& dir, const StepModel& sm,
                     const std::string& meta_json = "{}");

StepModel load_step_model(const std::string& dir);

// The free-form metadata block stored alongside the arrays.
std::string load_step_model_meta(const std::string& dir);

}  // namespace autonet
