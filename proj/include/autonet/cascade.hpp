#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "autonet/model_io.hpp"
#include "autonet/patches.hpp"
#include "autonet/posterior.hpp"
#include "autonet/sampling.hpp"
#include "autonet/train.hpp"

namespace autonet {

struct SamplingConfig {
  int total = 15000;
  std::array<double, 3> fractions{0.5, 0.25, 0.25};
  int border_cube = 5;
};

struct CascadeConfig {
  ArchKind arch = ArchKind::voxelwise;
  double epsilon = 1e-3;  // on the per-voxel mean cost
  int max_steps = 3;
  int test_steps = 2;
  // Warm start: each step gets the log-prior bypass plus a zeroed final
  // layer, so before any optimization it reproduces the previous step's
  // posterior and the recorded cost cannot rise. Off = fresh random heads.
  bool warm_start = true;
  TrainSchedule schedule = TrainSchedule::voxelwise_default();
  VoxelwiseConfig voxelwise;
  UnetConfig unet;
  Plane unet_plane = Plane::axial;
  SamplingConfig sampling;
  std::uint64_t seed = 0;
};

void validate(const CascadeConfig& cfg);
std::string to_json(const CascadeConfig& cfg);
CascadeConfig cascade_config_from_json(const std::string& text);

struct TrainingPair {
  std::string id;
  Volume volume;
  BinaryMask mask;
};

struct CascadeStepInfo {
  double cost = 0.0;  // H_t: per-voxel mean cross-entropy on the training images
  double delta = std::numeric_limits<double>::quiet_NaN();  // I_t = |H_t - H_{t-1}|
  bool reverted = false;  // training made H worse; step fell back to its init
  double train_seconds = 0.0;
  double posterior_seconds = 0.0;
  std::vector<double> epoch_loss;
  std::vector<std::string> conv1_names;
  std::vector<std::array<double, 2>> conv1_channel_norms;  // {intensity, context}
};

struct CascadeState {
  CascadeConfig config;
  std::vector<StepModel> models;
  std::vector<CascadeStepInfo> steps;
  bool converged = false;        // true iff the epsilon criterion fired
  std::string stopped_by;        // "epsilon" | "max_steps"

  std::vector<double> cost_history() const;
};

// |H_t - H_prev| < epsilon.
bool cascade_converged(double h_t, double h_prev, double epsilon);

// The auto-context training loop: step 0 consumes the uniform posterior as
// context; every later step consumes the posteriors the previous step
// produced on the training images. Stops on the epsilon criterion or after
// max_steps. When out_dir is nonempty the state is persisted stepwise
// (step-<t>/model.*, step-<t>/posteriors/<id>.nii.gz, history.json) and a
// matching partial run is resumed instead of retrained.
CascadeState run_training_cascade(const std::vector<TrainingPair>& pairs,
                                  const CascadeConfig& cfg, const std::string& out_dir = "");

// Applies models 0..test_steps-1, threading each step's posterior into the
// next step's context channel; returns every intermediate posterior.
std::vector<PosteriorVolume> run_inference_cascade_trace(CascadeState& state,
                                                         const Volume& raw_volume,
                                                         int test_steps);
PosteriorVolume run_inference_cascade(CascadeState& state, const Volume& raw_volume,
                                      int test_steps);

CascadeState load_cascade_state(const std::string& dir);

struct ChannelNorms {
  std::string pathway;
  double intensity = 0.0;
  double context = 0.0;
};

// Frobenius norms of the first convolution's kernel slices per input channel
// (intensity vs. context); diagnostic for how strongly a step leans on the
// previous posterior.
std::vector<ChannelNorms> first_layer_channel_norms(const StepModel& sm);

// Training-set construction for one image at one cascade step (exposed so
// tests can inject sentinel posteriors and observe the context channel).
std::vector<TrainSample> make_voxelwise_training_samples(
    const Volume& norm_vol, const BinaryMask& mask, const PosteriorVolume& prev_posterior,
    double mean, const VoxelwiseNet& net, const SamplingPlan& plan, bool bypass);

std::vector<TrainSample> make_unet_training_samples(const Volume& norm_vol,
                                                    const BinaryMask& mask,
                                                    const PosteriorVolume& prev_posterior,
                                                    double mean, const UnetNet& net,
                                                    Plane plane, bool bypass);

// Whole-volume posterior for one step model (dense voxelwise or per-slice
// unet path).
PosteriorVolume predict_step(StepModel& sm, const Volume& norm_vol,
                             const PosteriorVolume& prev_posterior, double mean);

}  // namespace autonet
