#include "autonet/model_io.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gzio.hpp"

namespace autonet {

namespace fs = std::filesystem;
using nlohmann::json;

const char* arch_kind_name(ArchKind k) {
  return k == ArchKind::voxelwise ? "voxelwise-2.5d" : "unet";
}

ArchKind arch_kind_from_name(const std::string& name) {
  if (name == "voxelwise-2.5d" || name == "voxelwise") return ArchKind::voxelwise;
  if (name == "unet") return ArchKind::unet;
  throw ValidationError("unknown architecture: " + name +
                        " (expected voxelwise-2.5d or unet)");
}

namespace {

json nodes_to_json(const NetworkSpec& spec) {
  json nodes = json::array();
  for (const LayerNode& n : spec.nodes) {
    json j;
    j["name"] = n.name;
    j["kind"] = layer_kind_name(n.kind);
    j["inputs"] = n.inputs;
    if (n.kind == LayerKind::conv) {
      j["kernel"] = {n.kh, n.kw};
      j["out_channels"] = n.out_channels;
      j["in_channels"] = n.in_channels;
      j["padding"] = n.padding == Padding::same ? "same" : "valid";
    }
    if (n.kind == LayerKind::linear_map) j["scale"] = n.scale;
    if (n.kind == LayerKind::batchnorm) j["channels"] = n.out_channels;
    nodes.push_back(std::move(j));
  }
  return nodes;
}

struct ArrayRef {
  int node;
  const char* field;
  const std::vector<float>* data;
};

std::vector<ArrayRef> array_table(const Model& model) {
  std::vector<ArrayRef> refs;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const auto& p = model.params[i];
    const int node = static_cast<int>(i);
    if (!p.w.empty()) refs.push_back({node, "w", &p.w});
    if (!p.b.empty()) refs.push_back({node, "b", &p.b});
    if (!p.run_mean.empty()) refs.push_back({node, "run_mean", &p.run_mean});
    if (!p.run_var.empty()) refs.push_back({node, "run_var", &p.run_var});
  }
  return refs;
}

json arch_to_json(const StepModel& sm) {
  json a;
  a["kind"] = arch_kind_name(sm.kind);
  if (sm.kind == ArchKind::voxelwise) {
    const VoxelwiseConfig& c = sm.vox.cfg;
    a["sizes"] = c.sizes;
    json planes = json::array();
    for (Plane p : c.planes) planes.push_back(plane_name(p));
    a["planes"] = std::move(planes);
    a["conv1_kernels"] = c.conv1_kernels;
    a["conv2_kernels"] = c.conv2_kernels;
    a["conv3_kernels"] = c.conv3_kernels;
    a["fc_kernels"] = c.fc_kernels;
    a["plane_mix_kernels"] = c.plane_mix_kernels;
    a["classes"] = c.classes;
    a["input_scale"] = c.input_scale;
    a["in_channels"] = sm.vox.in_channels;
  } else {
    const UnetConfig& c = sm.unet.cfg;
    a["depth"] = c.depth;
    a["base_features"] = c.base_features;
    a["input_scale"] = c.input_scale;
    a["classes"] = sm.unet.classes;
    a["in_channels"] = sm.unet.in_channels;
    a["plane"] = plane_name(sm.unet_plane);
  }
  return a;
}

StepModel arch_from_json(const json& a) {
  StepModel sm;
  sm.kind = arch_kind_from_name(a.at("kind").get<std::string>());
  if (sm.kind == ArchKind::voxelwise) {
    VoxelwiseConfig c;
    a.at("sizes").get_to(c.sizes);
    c.planes.clear();
    for (const auto& p : a.at("planes")) c.planes.push_back(plane_from_name(p));
    c.conv1_kernels = a.at("conv1_kernels").get<int>();
    c.conv2_kernels = a.at("conv2_kernels").get<int>();
    c.conv3_kernels = a.at("conv3_kernels").get<int>();
    c.fc_kernels = a.at("fc_kernels").get<int>();
    c.plane_mix_kernels = a.at("plane_mix_kernels").get<int>();
    c.classes = a.at("classes").get<int>();
    c.input_scale = a.at("input_scale").get<double>();
    sm.vox = build_voxelwise_spec(c, a.at("in_channels").get<int>());
  } else {
    UnetConfig c;
    c.depth = a.at("depth").get<int>();
    c.base_features = a.at("base_features").get<int>();
    c.input_scale = a.at("input_scale").get<double>();
    sm.unet = build_unet_spec(c, a.at("in_channels").get<int>(), a.at("classes").get<int>());
    sm.unet_plane = plane_from_name(a.at("plane").get<std::string>());
  }
  return sm;
}

}  // namespace

void save_step_model(const std::string& dir, const StepModel& sm,
                     const std::string& meta_json) {
  fs::create_directories(dir);
  const auto refs = array_table(sm.model);

  json manifest;
  manifest["format"] = "autonet-model v1";
  manifest["arch"] = arch_to_json(sm);
  manifest["nodes"] = nodes_to_json(sm.spec());
  manifest["output"] = sm.spec().output;
  manifest["classes"] = sm.spec().classes;
  manifest["seed"] = sm.model.seed;
  manifest["log_prior_bypass"] = sm.model.log_prior_bypass;
  json arrays = json::array();
  std::size_t total = 0;
  for (const auto& r : refs) {
    arrays.push_back({{"node", r.node}, {"field", r.field}, {"count", r.data->size()}});
    total += r.data->size();
  }
  manifest["arrays"] = std::move(arrays);
  manifest["meta"] = json::parse(meta_json);

  const std::string text = manifest.dump(2);
  detail::write_file((fs::path(dir) / "model.json").string(), text.data(), text.size());

  std::vector<float> blob;
  blob.reserve(total);
  for (const auto& r : refs) blob.insert(blob.end(), r.data->begin(), r.data->end());
  detail::write_file((fs::path(dir) / "model.bin").string(), blob.data(), blob.size() * 4);
}

StepModel load_step_model(const std::string& dir) {
  const auto jbytes = detail::read_file((fs::path(dir) / "model.json").string());
  json manifest;
  try {
    manifest = json::parse(jbytes.begin(), jbytes.end());
  } catch (const json::exception& e) {
    throw IoError("corrupt model.json in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "autonet-model v1")
    throw IoError("unsupported model format in " + dir);

  StepModel sm = arch_from_json(manifest.at("arch"));
  // Sanity: the rebuilt graph must match what was serialized.
  const auto nodes = nodes_to_json(sm.spec());
  if (nodes != manifest.at("nodes"))
    throw IoError("model graph in " + dir + " does not match its architecture config");

  sm.model = init_model<float>(sm.spec(), manifest.value("seed", std::uint64_t(0)), false);
  sm.model.log_prior_bypass = manifest.value("log_prior_bypass", false);

  const auto blob = detail::read_file((fs::path(dir) / "model.bin").string());
  const float* cursor = reinterpret_cast<const float*>(blob.data());
  std::size_t remaining = blob.size() / 4;
  for (const auto& a : manifest.at("arrays")) {
    const int node = a.at("node").get<int>();
    const std::string field = a.at("field").get<std::string>();
    const std::size_t count = a.at("count").get<std::size_t>();
    if (node < 0 || node >= static_cast<int>(sm.model.params.size()))
      throw IoError("array table references unknown node in " + dir);
    std::vector<float>* dst = nullptr;
    auto& p = sm.model.params[node];
    if (field == "w") dst = &p.w;
    else if (field == "b") dst = &p.b;
    else if (field == "run_mean") dst = &p.run_mean;
    else if (field == "run_var") dst = &p.run_var;
    else throw IoError("unknown array field '" + field + "' in " + dir);
    if (dst->size() != count)
      throw IoError("array size mismatch for node " + std::to_string(node) + " in " + dir);
    if (remaining < count) throw IoError("model.bin too short in " + dir);
    std::copy(cursor, cursor + count, dst->begin());
    cursor += count;
    remaining -= count;
  }
  return sm;
}

std::string load_step_model_meta(const std::string& dir) {
  const auto jbytes = detail::read_file((fs::path(dir) / "model.json").string());
  const json manifest = json::parse(jbytes.begin(), jbytes.end());
  return manifest.value("meta", json::object()).dump();
}

}  // namespace autonet
