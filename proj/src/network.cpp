#include "autonet/network.hpp"

#include <algorithm>

namespace autonet {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::input: return "input";
    case LayerKind::linear_map: return "linear-map";
    case LayerKind::conv: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::upsample: return "upsample";
    case LayerKind::concat: return "concat";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  for (LayerKind k : {LayerKind::input, LayerKind::linear_map, LayerKind::conv, LayerKind::relu,
                      LayerKind::batchnorm, LayerKind::maxpool, LayerKind::upsample,
                      LayerKind::concat, LayerKind::softmax})
    if (name == layer_kind_name(k)) return k;
  throw ValidationError("unknown layer kind: " + name);
}

std::int64_t count_parameters(const NetworkSpec& spec) {
  std::int64_t total = 0;
  for (const LayerNode& n : spec.nodes) {
    if (n.kind == LayerKind::conv)
      total += static_cast<std::int64_t>(n.kh) * n.kw * n.in_channels * n.out_channels +
               n.out_channels;
    else if (n.kind == LayerKind::batchnorm)
      total += 2ll * n.out_channels;
  }
  return total;
}

namespace {

// Small wiring helper; resolves in/out channels as nodes are appended.
struct GraphBuilder {
  NetworkSpec spec;

  int channels_of(int node) const { return spec.nodes[node].out_channels; }

  int add_input(const std::string& name, int h, int w, int c) {
    LayerNode n;
    n.kind = LayerKind::input;
    n.name = name;
    n.out_channels = c;
    spec.nodes.push_back(n);
    const int id = static_cast<int>(spec.nodes.size()) - 1;
    spec.inputs.push_back(id);
    spec.input_info.push_back({name, h, w, c});
    return id;
  }

  int add_scale(const std::string& name, int src, double factor) {
    LayerNode n;
    n.kind = LayerKind::linear_map;
    n.name = name;
    n.inputs = {src};
    n.scale = factor;
    n.in_channels = n.out_channels = channels_of(src);
    spec.nodes.push_back(n);
    return static_cast<int>(spec.nodes.size()) - 1;
  }

  int add_conv(const std::string& name, int src, int kh, int kw, int out_c, Padding pad) {
    LayerNode n;
    n.kind = LayerKind::conv;
    n.name = name;
    n.inputs = {src};
    n.kh = kh;
    n.kw = kw;
    n.out_channels = out_c;
    n.padding = pad;
    n.in_channels = channels_of(src);
    spec.nodes.push_back(n);
    return static_cast<int>(spec.nodes.size()) - 1;
  }

  int add_simple(LayerKind kind, const std::string& name, int src) {
    LayerNode n;
    n.kind = kind;
    n.name = name;
    n.inputs = {src};
    n.in_channels = n.out_channels = channels_of(src);
    spec.nodes.push_back(n);
    return static_cast<int>(spec.nodes.size()) - 1;
  }

  int add_concat(const std::string& name, const std::vector<int>& srcs) {
    LayerNode n;
    n.kind = LayerKind::concat;
    n.name = name;
    n.inputs = srcs;
    int c = 0;
    for (int s : srcs) c += channels_of(s);
    n.in_channels = n.out_channels = c;
    spec.nodes.push_back(n);
    return static_cast<int>(spec.nodes.size()) - 1;
  }
};

}  // namespace

void validate(const VoxelwiseConfig& cfg) {
  if (cfg.sizes.empty()) throw ValidationError("voxelwise config needs at least one size");
  for (int s : cfg.sizes) {
    if (s < 3 || s % 2 == 0)
      throw ValidationError("patch sizes must be odd and >= 3, got " + std::to_string(s));
    const auto chain = voxelwise_spatial_chain(s);
    if (chain.back() != 1)
      throw ValidationError("pathway for size " + std::to_string(s) +
                            " does not collapse to 1x1");
  }
  if (cfg.planes.empty()) throw ValidationError("voxelwise config needs at least one plane");
  if (cfg.conv1_kernels <= 0 || cfg.conv2_kernels <= 0 || cfg.conv3_kernels <= 0 ||
      cfg.fc_kernels <= 0 || cfg.plane_mix_kernels <= 0)
    throw ValidationError("kernel counts must be positive");
  if (cfg.classes < 2) throw ValidationError("at least two classes required");
}

std::vector<int> voxelwise_spatial_chain(int size) {
  const int k1 = VoxelwiseConfig::conv1_kernel_for(size);
  const int k2 = VoxelwiseConfig::conv2_kernel_for(size);
  std::vector<int> chain{size};
  chain.push_back(chain.back() - k1 + 1);
  chain.push_back(chain.back() - k2 + 1);
  chain.push_back(chain.back() - 3 + 1);
  if (chain.back() < 1)
    throw ValidationError("patch size " + std::to_string(size) +
                          " is too small for the convolution stack");
  chain.push_back(1);  // fully-connected-as-convolution spans the rest
  return chain;
}

VoxelwiseNet build_voxelwise_spec(const VoxelwiseConfig& cfg, int in_channels) {
  validate(cfg);
  if (in_channels != 1 && in_channels != 2)
    throw ValidationError("voxelwise network supports 1 or 2 input channels");

  VoxelwiseNet net;
  net.cfg = cfg;
  net.in_channels = in_channels;
  GraphBuilder gb;
  gb.spec.classes = cfg.classes;

  std::vector<int> plane_nodes;
  for (Plane plane : cfg.planes) {
    const std::string pn = plane_name(plane);
    std::vector<int> pathway_outputs;
    for (int size : cfg.sizes) {
      const std::string tag = pn + std::to_string(size);
      const auto chain = voxelwise_spatial_chain(size);
      const int k1 = VoxelwiseConfig::conv1_kernel_for(size);
      const int k2 = VoxelwiseConfig::conv2_kernel_for(size);

      VoxelwisePathway pw;
      pw.plane = plane;
      pw.size = size;
      pw.input_node = gb.add_input("in_" + tag, size, size, in_channels);
      int x = gb.add_scale("scale_" + tag, pw.input_node, cfg.input_scale);
      pw.conv1_node = gb.add_conv("conv1_" + tag, x, k1, k1, cfg.conv1_kernels, Padding::valid);
      x = gb.add_simple(LayerKind::relu, "relu1_" + tag, pw.conv1_node);
      x = gb.add_simple(LayerKind::batchnorm, "bn1_" + tag, x);
      x = gb.add_conv("conv2_" + tag, x, k2, k2, cfg.conv2_kernels, Padding::valid);
      x = gb.add_simple(LayerKind::relu, "relu2_" + tag, x);
      x = gb.add_conv("conv3_" + tag, x, 3, 3, cfg.conv3_kernels, Padding::valid);
      x = gb.add_simple(LayerKind::relu, "relu3_" + tag, x);
      const int rest = chain[3];
      x = gb.add_conv("fc_" + tag, x, rest, rest, cfg.fc_kernels, Padding::valid);
      x = gb.add_simple(LayerKind::relu, "relu_fc_" + tag, x);
      pw.fc_relu_node = x;
      net.pathways.push_back(pw);
      pathway_outputs.push_back(x);
    }
    int px = pathway_outputs.size() > 1 ? gb.add_concat("concat_" + pn, pathway_outputs)
                                        : pathway_outputs.front();
    px = gb.add_conv("mix_" + pn, px, 1, 1, cfg.plane_mix_kernels, Padding::valid);
    px = gb.add_simple(LayerKind::relu, "relu_mix_" + pn, px);
    net.plane_feature_nodes.push_back(px);
    plane_nodes.push_back(px);
  }

  int x = plane_nodes.size() > 1 ? gb.add_concat("concat_planes", plane_nodes)
                                 : plane_nodes.front();
  net.final_conv_node = gb.add_conv("logits", x, 1, 1, cfg.classes, Padding::valid);
  gb.spec.output = net.final_conv_node;
  gb.add_simple(LayerKind::softmax, "posterior", net.final_conv_node);
  net.spec = std::move(gb.spec);
  return net;
}

void validate(const UnetConfig& cfg) {
  if (cfg.depth < 0) throw ValidationError("unet depth must be >= 0");
  if (cfg.base_features <= 0) throw ValidationError("unet base features must be positive");
}

UnetNet build_unet_spec(const UnetConfig& cfg, int in_channels, int classes) {
  validate(cfg);
  if (in_channels < 1) throw ValidationError("unet needs at least one input channel");
  if (classes < 2) throw ValidationError("at least two classes required");

  UnetNet net;
  net.cfg = cfg;
  net.in_channels = in_channels;
  net.classes = classes;
  GraphBuilder gb;
  gb.spec.classes = classes;

  auto block = [&](int src, int features, const std::string& tag) {
    int x = gb.add_conv("conv_" + tag + "a", src, 3, 3, features, Padding::same);
    x = gb.add_simple(LayerKind::relu, "relu_" + tag + "a", x);
    x = gb.add_conv("conv_" + tag + "b", x, 3, 3, features, Padding::same);
    x = gb.add_simple(LayerKind::relu, "relu_" + tag + "b", x);
    return x;
  };

  const int input = gb.add_input("in", 0, 0, in_channels);
  int x = gb.add_scale("scale_in", input, cfg.input_scale);

  std::vector<int> skips;
  for (int level = 0; level < cfg.depth; ++level) {
    x = block(x, cfg.base_features << level, "enc" + std::to_string(level));
    skips.push_back(x);
    x = gb.add_simple(LayerKind::maxpool, "pool" + std::to_string(level), x);
  }
  x = block(x, cfg.base_features << cfg.depth, "bottleneck");
  for (int level = cfg.depth - 1; level >= 0; --level) {
    x = gb.add_simple(LayerKind::upsample, "up" + std::to_string(level), x);
    x = gb.add_concat("skip" + std::to_string(level), {x, skips[level]});
    x = block(x, cfg.base_features << level, "dec" + std::to_string(level));
  }
  net.final_conv_node = gb.add_conv("logits", x, 1, 1, classes, Padding::valid);
  gb.spec.output = net.final_conv_node;
  gb.add_simple(LayerKind::softmax, "posterior", net.final_conv_node);
  net.spec = std::move(gb.spec);
  return net;
}

}  // namespace autonet
