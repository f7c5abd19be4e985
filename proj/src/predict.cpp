#include "autonet/predict.hpp"

#include <cmath>

#include "autonet/losses.hpp"

namespace autonet {

std::array<float, 2> log_prior_pair(float q) {
  constexpr float floor = 1e-7f;
  const float qc = std::min(1.0f - floor, std::max(floor, q));
  return {std::log(1.0f - qc), std::log(qc)};
}

namespace {

void check_context(int in_channels, const ContextChannel* ctx) {
  if (in_channels == 2 && ctx == nullptr)
    throw ValidationError("this model takes a context channel but none was provided");
  if (in_channels == 1 && ctx != nullptr)
    throw ValidationError("this model takes no context channel");
}

void check_prior(const Model& model, const PosteriorVolume* prior) {
  if (model.log_prior_bypass && prior == nullptr)
    throw ValidationError("model uses the log-prior bypass but no prior was provided");
}

}  // namespace

std::vector<std::array<float, 2>> predict_voxelwise(
    const VoxelwiseNet& net, Model& model, const Volume& vol, const ContextChannel* ctx,
    const PosteriorVolume* prior, const std::vector<std::array<int, 3>>& voxels,
    int batch_size) {
  check_context(net.in_channels, ctx);
  check_prior(model, prior);
  PatchConfig pcfg;
  pcfg.sizes = net.cfg.sizes;
  pcfg.planes = net.cfg.planes;
  pcfg.with_context = ctx != nullptr;

  std::vector<std::array<float, 2>> out(voxels.size());
  ForwardPass<float> fp;
  const int B = std::max(1, batch_size);
  const std::size_t slots = net.spec.inputs.size();

  for (std::size_t lo = 0; lo < voxels.size(); lo += B) {
    const std::size_t hi = std::min(voxels.size(), lo + B);
    std::vector<PatchSet> sets;
    sets.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i)
      sets.push_back(extract_patch_set(vol, ctx, voxels[i], pcfg));

    std::vector<Tensor<float>> batch(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      std::vector<const Tensor<float>*> parts;
      for (const auto& set : sets) parts.push_back(&set.patches[s].data);
      batch[s] = stack_tensors(parts);
    }
    std::vector<const Tensor<float>*> input_ptrs;
    for (const auto& t : batch) input_ptrs.push_back(&t);

    Tensor<float> logits = forward(net.spec, model, input_ptrs, /*train=*/false, fp);
    for (std::size_t i = lo; i < hi; ++i) {
      const int b = static_cast<int>(i - lo);
      float z0 = logits.at(b, 0, 0, 0);
      float z1 = logits.at(b, 0, 0, 1);
      if (model.log_prior_bypass) {
        const auto& v = voxels[i];
        const auto lp = log_prior_pair(prior->at(v[0], v[1], v[2], 1));
        z0 += lp[0];
        z1 += lp[1];
      }
      const float zmax = std::max(z0, z1);
      const double e0 = std::exp(static_cast<double>(z0 - zmax));
      const double e1 = std::exp(static_cast<double>(z1 - zmax));
      out[i] = {static_cast<float>(e0 / (e0 + e1)), static_cast<float>(e1 / (e0 + e1))};
    }
  }
  return out;
}

PosteriorVolume predict_voxelwise_dense(const VoxelwiseNet& net, Model& model,
                                        const Volume& vol, const ContextChannel* ctx,
                                        const PosteriorVolume* prior) {
  check_context(net.in_channels, ctx);
  check_prior(model, prior);
  const auto dims = vol.dims;
  const std::size_t n_vox = vol.size();

  const LayerNode& final_node = net.spec.nodes[net.final_conv_node];
  const NodeParams<float>& final_params = model.params[net.final_conv_node];
  const int classes = final_node.out_channels;
  std::vector<double> logits(n_vox * classes);
  for (std::size_t v = 0; v < n_vox; ++v)
    for (int c = 0; c < classes; ++c) logits[v * classes + c] = final_params.b[c];

  ForwardPass<float> fp;
  int channel_offset = 0;
  for (std::size_t pi = 0; pi < net.cfg.planes.size(); ++pi) {
    const Plane plane = net.cfg.planes[pi];
    const PlaneAxes ax = plane_axes(plane);
    const int W = dims[ax.u_axis], H = dims[ax.v_axis], D = dims[ax.normal_axis];

    // Pathways of this plane, keyed by input node.
    std::vector<const VoxelwisePathway*> pws;
    for (const auto& pw : net.pathways)
      if (pw.plane == plane) pws.push_back(&pw);

    for (int s = 0; s < D; ++s) {
      std::vector<Tensor<float>> padded(pws.size());
      std::map<int, const Tensor<float>*> bound;
      for (std::size_t q = 0; q < pws.size(); ++q) {
        const int pad = (pws[q]->size - 1) / 2;
        Tensor<float>& t = padded[q];
        t = Tensor<float>(1, H + 2 * pad, W + 2 * pad, net.in_channels, 0.0f);
        std::array<int, 3> ijk{};
        ijk[ax.normal_axis] = s;
        for (int y = 0; y < H; ++y) {
          ijk[ax.v_axis] = y;
          for (int x = 0; x < W; ++x) {
            ijk[ax.u_axis] = x;
            t.at(0, y + pad, x + pad, 0) = vol.at(ijk[0], ijk[1], ijk[2]);
            if (net.in_channels == 2)
              t.at(0, y + pad, x + pad, 1) = ctx->values.at(ijk[0], ijk[1], ijk[2]);
          }
        }
        bound[pws[q]->input_node] = &t;
      }
      const Tensor<float>& feat = forward_to(net.spec, model, net.plane_feature_nodes[pi],
                                             bound, /*train=*/false, fp);
      // 1x1 mix into the final logits: only the channel block of this plane.
      std::array<int, 3> ijk{};
      ijk[ax.normal_axis] = s;
      for (int y = 0; y < H; ++y) {
        ijk[ax.v_axis] = y;
        for (int x = 0; x < W; ++x) {
          ijk[ax.u_axis] = x;
          const std::size_t v = vol.index(ijk[0], ijk[1], ijk[2]);
          const float* f = &feat.v[feat.index(0, y, x, 0)];
          for (int ci = 0; ci < feat.c; ++ci) {
            const float* wrow = &final_params.w[(channel_offset + ci) * classes];
            for (int c = 0; c < classes; ++c) logits[v * classes + c] += f[ci] * wrow[c];
          }
        }
      }
    }
    channel_offset += net.cfg.plane_mix_kernels;
  }

  PosteriorVolume out(dims, classes, vol.spacing);
  for (std::size_t v = 0; v < n_vox; ++v) {
    double z0 = logits[v * classes + 0];
    double z1 = logits[v * classes + 1];
    if (model.log_prior_bypass) {
      const auto lp = log_prior_pair(prior->data[v * 2 + 1]);
      z0 += lp[0];
      z1 += lp[1];
    }
    const double zmax = std::max(z0, z1);
    const double e0 = std::exp(z0 - zmax), e1 = std::exp(z1 - zmax);
    out.data[v * 2 + 0] = static_cast<float>(e0 / (e0 + e1));
    out.data[v * 2 + 1] = static_cast<float>(e1 / (e0 + e1));
  }
  return out;
}

PosteriorVolume predict_unet(const UnetNet& net, Model& model, const Volume& vol,
                             const ContextChannel* ctx, const PosteriorVolume* prior,
                             Plane plane, int batch_size) {
  check_context(net.in_channels, ctx);
  check_prior(model, prior);
  const int multiple = 1 << net.cfg.depth;
  const SliceStack stack = extract_slice_stack(vol, ctx, plane, multiple);
  const PlaneAxes ax = plane_axes(plane);
  const int D = vol.dims[ax.normal_axis];
  const int classes = net.classes;

  PosteriorVolume out(vol.dims, classes, vol.spacing);
  ForwardPass<float> fp;
  const int B = std::max(1, batch_size);
  for (int lo = 0; lo < D; lo += B) {
    const int hi = std::min(D, lo + B);
    std::vector<const Tensor<float>*> parts;
    for (int s = lo; s < hi; ++s) parts.push_back(&stack.slices[s]);
    Tensor<float> batch = stack_tensors(parts);
    std::vector<const Tensor<float>*> inputs{&batch};
    const Tensor<float>& logits = forward(net.spec, model, inputs, /*train=*/false, fp);

    for (int s = lo; s < hi; ++s) {
      const int b = s - lo;
      std::array<int, 3> ijk{};
      ijk[ax.normal_axis] = s;
      for (int y = 0; y < stack.height; ++y) {
        ijk[ax.v_axis] = y;
        for (int x = 0; x < stack.width; ++x) {
          ijk[ax.u_axis] = x;
          const std::size_t v = out.voxel_index(ijk[0], ijk[1], ijk[2]);
          double z0 = logits.at(b, y, x, 0);
          double z1 = logits.at(b, y, x, 1);
          if (model.log_prior_bypass) {
            const auto lp = log_prior_pair(prior->data[v * 2 + 1]);
            z0 += lp[0];
            z1 += lp[1];
          }
          const double zmax = std::max(z0, z1);
          const double e0 = std::exp(z0 - zmax), e1 = std::exp(z1 - zmax);
          out.data[v * 2 + 0] = static_cast<float>(e0 / (e0 + e1));
          out.data[v * 2 + 1] = static_cast<float>(e1 / (e0 + e1));
        }
      }
    }
  }
  return out;
}

}  // namespace autonet
