#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autonet/ops.hpp"
#include "autonet/rng.hpp"

namespace autonet {

enum class LayerKind {
  input,
  linear_map,  // fixed elementwise gain, no parameters
  conv,
  relu,
  batchnorm,
  maxpool,
  upsample,
  concat,
  softmax,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerNode {
  LayerKind kind = LayerKind::input;
  std::string name;
  std::vector<int> inputs;  // node indices, topological order guaranteed
  int kh = 0, kw = 0;
  int out_channels = 0;
  Padding padding = Padding::valid;
  double scale = 1.0;   // linear_map gain
  int in_channels = 0;  // resolved when the graph is built
};

struct InputInfo {
  std::string name;
  int h = 0, w = 0;  // 0 = dynamic extent
  int c = 1;
};

// Declarative layer graph. `output` is the logits node; a trailing softmax
// node marks the probabilistic head but losses consume the logits directly.
struct NetworkSpec {
  std::vector<LayerNode> nodes;
  std::vector<int> inputs;  // indices of input nodes, in binding order
  std::vector<InputInfo> input_info;
  int output = -1;
  int classes = 2;
};

// Closed-form trainable parameter count: conv kh*kw*in*out + out,
// batchnorm 2 per channel; everything else is parameter-free.
std::int64_t count_parameters(const NetworkSpec& spec);

// ---------------------------------------------------------------------------
// Parameters

template <typename S>
struct NodeParams {
  std::vector<S> w, b;                  // conv kernel/bias; batchnorm gamma/beta
  std::vector<S> run_mean, run_var;     // batchnorm eval statistics (not counted)
};

template <typename S>
struct ModelT {
  std::vector<NodeParams<S>> params;  // parallel to spec.nodes
  std::uint64_t seed = 0;
  // When set, inference adds log p_prev at each position to the logits; the
  // cascade uses this together with a zeroed final layer so a fresh step
  // starts out reproducing the previous step's posterior.
  bool log_prior_bypass = false;

  template <typename T>
  ModelT<T> cast() const {
    ModelT<T> out;
    out.seed = seed;
    out.log_prior_bypass = log_prior_bypass;
    out.params.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto cv = [](const std::vector<S>& v) {
        std::vector<T> r(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) r[j] = static_cast<T>(v[j]);
        return r;
      };
      out.params[i].w = cv(params[i].w);
      out.params[i].b = cv(params[i].b);
      out.params[i].run_mean = cv(params[i].run_mean);
      out.params[i].run_var = cv(params[i].run_var);
    }
    return out;
  }
};

using Model = ModelT<float>;

// He-normal initialization for conv kernels, zero biases, identity batchnorm.
// zero_final_layer zeroes the output conv so the model's logits start at 0.
template <typename S>
ModelT<S> init_model(const NetworkSpec& spec, std::uint64_t seed, bool zero_final_layer) {
  ModelT<S> model;
  model.seed = seed;
  model.params.resize(spec.nodes.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const LayerNode& node = spec.nodes[i];
    NodeParams<S>& p = model.params[i];
    if (node.kind == LayerKind::conv) {
      const std::size_t nw =
          static_cast<std::size_t>(node.kh) * node.kw * node.in_channels * node.out_channels;
      p.w.resize(nw);
      p.b.assign(node.out_channels, S(0));
      const double stddev = std::sqrt(2.0 / (static_cast<double>(node.kh) * node.kw *
                                             node.in_channels));
      for (S& x : p.w) x = static_cast<S>(stddev * rng.normal());
      if (zero_final_layer && static_cast<int>(i) == spec.output)
        std::fill(p.w.begin(), p.w.end(), S(0));
    } else if (node.kind == LayerKind::batchnorm) {
      p.w.assign(node.out_channels, S(1));  // gamma
      p.b.assign(node.out_channels, S(0));  // beta
      p.run_mean.assign(node.out_channels, S(0));
      p.run_var.assign(node.out_channels, S(1));
    }
  }
  return model;
}

// Element count of the instantiated trainable arrays (w + b).
template <typename S>
std::int64_t parameter_element_count(const ModelT<S>& model) {
  std::int64_t n = 0;
  for (const auto& p : model.params)
    n += static_cast<std::int64_t>(p.w.size()) + static_cast<std::int64_t>(p.b.size());
  return n;
}

// ---------------------------------------------------------------------------
// Architecture builders

struct VoxelwiseConfig {
  std::vector<int> sizes{15, 25, 51};
  std::vector<Plane> planes{Plane::axial, Plane::coronal, Plane::sagittal};
  int conv1_kernels = 24;
  int conv2_kernels = 32;
  int conv3_kernels = 48;
  int fc_kernels = 256;         // fully-connected layer realized as a convolution
  int plane_mix_kernels = 64;   // 1x1 mix of the per-plane concatenation
  int classes = 2;
  double input_scale = 1.0 / 255.0;

  // First/second layer kernel widths by patch size: large windows get the
  // wider kernels.
  static int conv1_kernel_for(int size) { return size >= 40 ? 7 : size >= 12 ? 5 : 3; }
  static int conv2_kernel_for(int size) { return size >= 40 ? 5 : 3; }
};

void validate(const VoxelwiseConfig& cfg);

// Spatial extents along one pathway: {size, after conv1, after conv2,
// after conv3, after fc} — all pathway convolutions are unpadded.
std::vector<int> voxelwise_spatial_chain(int size);

struct VoxelwisePathway {
  Plane plane;
  int size = 0;
  int input_node = -1;
  int conv1_node = -1;
  int fc_relu_node = -1;  // pathway output (post-activation)
};

struct VoxelwiseNet {
  NetworkSpec spec;
  VoxelwiseConfig cfg;
  int in_channels = 1;
  std::vector<VoxelwisePathway> pathways;     // plane-major, sizes in config order
  std::vector<int> plane_feature_nodes;       // per plane: post-mix activation
  int final_conv_node = -1;
};

VoxelwiseNet build_voxelwise_spec(const VoxelwiseConfig& cfg, int in_channels);

struct UnetConfig {
  int depth = 4;          // max-pool levels
  int base_features = 64; // doubled at every level
  double input_scale = 1.0 / 255.0;
};

void validate(const UnetConfig& cfg);

struct UnetNet {
  NetworkSpec spec;
  UnetConfig cfg;
  int in_channels = 1;
  int classes = 2;
  int final_conv_node = -1;
};

UnetNet build_unet_spec(const UnetConfig& cfg, int in_channels, int classes);

}  // namespace autonet
