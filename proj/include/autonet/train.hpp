#pragma once

#include <cstdint>
#include <vector>

#include "autonet/graph.hpp"
#include "autonet/losses.hpp"

namespace autonet {

struct TrainStage {
  double learning_rate = 1e-3;
  int samples_per_image = 5000;
  int epochs = 15;
};

// Optimizer settings plus the staged schedule: the voxelwise net trains in
// three stages on fresh sample blocks at decreasing rates; the fully
// convolutional net trains in one stage with stepwise rate decay.
struct TrainSchedule {
  std::vector<TrainStage> stages{{1e-3, 5000, 15}};
  double lr_decay = 1.0;  // multiplicative factor per lr_decay_steps
  int lr_decay_steps = 0; // 0 disables decay
  int batch_size = 64;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  static TrainSchedule voxelwise_default() {
    TrainSchedule s;
    s.stages = {{1e-3, 5000, 15}, {1e-4, 5000, 15}, {5e-5, 5000, 15}};
    s.batch_size = 64;
    return s;
  }
  static TrainSchedule unet_default() {
    TrainSchedule s;
    s.stages = {{1e-3, 0, 15}};
    s.lr_decay = 0.9;
    s.lr_decay_steps = 2000;
    s.batch_size = 4;
    return s;
  }

  double lr_at(std::int64_t global_step, double stage_lr) const {
    if (lr_decay_steps <= 0 || lr_decay == 1.0) return stage_lr;
    double lr = stage_lr;
    for (std::int64_t s = lr_decay_steps; s <= global_step; s += lr_decay_steps) lr *= lr_decay;
    return lr;
  }

  int total_samples_per_image() const {
    int n = 0;
    for (const auto& st : stages) n += st.samples_per_image;
    return n;
  }
};

struct Adam {
  std::vector<NodeParams<float>> m, v;
  std::int64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  void init(const Model& model, const TrainSchedule& schedule);
  void step(Model& model, const Gradients<float>& grads, double lr);
};

// One training example: per-input tensors (n=1), a label per logit pixel,
// and an optional additive log-prior for the cascade bypass.
struct TrainSample {
  std::vector<Tensor<float>> inputs;
  std::vector<std::uint8_t> labels;
  Tensor<float> logit_offset;  // empty when unused

  bool has_offset() const { return !logit_offset.v.empty(); }
};

struct TrainOptions {
  double learning_rate = 1e-3;
  int epochs = 1;
  int batch_size = 64;
  std::vector<double> class_weights;  // empty = uniform
  std::uint64_t shuffle_seed = 0;
  double lr_decay = 1.0;
  int lr_decay_steps = 0;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::int64_t steps = 0;
};

// Minimizes the (weighted) cross-entropy over the samples with Adam.
// Throws TrainingError when the loss stops being finite.
TrainLog train_network(const NetworkSpec& spec, Model& model, Adam& adam,
                       const std::vector<const TrainSample*>& samples,
                       const TrainOptions& options);

}  // namespace autonet
