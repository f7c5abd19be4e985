#pragma once

#include <map>

#include "autonet/network.hpp"

namespace autonet {

// One forward evaluation with everything the backward pass needs.
template <typename S>
struct ForwardPass {
  std::vector<Tensor<S>> act;                 // per node
  std::vector<char> computed;                 // per node
  std::vector<std::vector<S>> bn_mean, bn_invstd;
  std::vector<Tensor<S>> bn_xhat;
  std::vector<std::vector<std::int32_t>> pool_argmax;
  bool train_mode = false;

  void reset(std::size_t n_nodes, bool train) {
    act.assign(n_nodes, {});
    computed.assign(n_nodes, 0);
    bn_mean.assign(n_nodes, {});
    bn_invstd.assign(n_nodes, {});
    bn_xhat.assign(n_nodes, {});
    pool_argmax.assign(n_nodes, {});
    train_mode = train;
  }
};

template <typename S>
struct Gradients {
  std::vector<NodeParams<S>> params;  // w/b gradients, parallel to model params

  void reset_like(const ModelT<S>& model) {
    params.resize(model.params.size());
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      params[i].w.assign(model.params[i].w.size(), S(0));
      params[i].b.assign(model.params[i].b.size(), S(0));
    }
  }
};

namespace detail_graph {

template <typename S>
void eval_node(const NetworkSpec& spec, ModelT<S>& model, int id, ForwardPass<S>& fp) {
  const LayerNode& node = spec.nodes[id];
  NodeParams<S>& p = model.params[id];
  auto& in0 = fp.act[node.inputs.empty() ? id : node.inputs[0]];
  switch (node.kind) {
    case LayerKind::input:
      throw ValidationError("input node '" + node.name + "' was not bound");
    case LayerKind::linear_map:
      fp.act[id] = ops::scale_forward(in0, node.scale);
      break;
    case LayerKind::conv:
      fp.act[id] = ops::conv2d_forward(in0, p.w, p.b, node.kh, node.kw, node.out_channels,
                                       node.padding);
      break;
    case LayerKind::relu:
      fp.act[id] = ops::relu_forward(in0);
      break;
    case LayerKind::batchnorm:
      if (fp.train_mode)
        fp.act[id] = ops::batchnorm_forward_train(in0, p.w, p.b, p.run_mean, p.run_var,
                                                  fp.bn_mean[id], fp.bn_invstd[id],
                                                  fp.bn_xhat[id]);
      else
        fp.act[id] = ops::batchnorm_forward_eval(in0, p.w, p.b, p.run_mean, p.run_var);
      break;
    case LayerKind::maxpool:
      fp.act[id] = ops::maxpool2_forward(in0, fp.pool_argmax[id]);
      break;
    case LayerKind::upsample:
      fp.act[id] = ops::upsample2_forward(in0);
      break;
    case LayerKind::concat: {
      std::vector<const Tensor<S>*> parts;
      for (int src : node.inputs) parts.push_back(&fp.act[src]);
      fp.act[id] = ops::concat_forward(parts);
      break;
    }
    case LayerKind::softmax:
      // marker node: losses and predictors consume the logits directly
      fp.act[id] = in0;
      break;
  }
  fp.computed[id] = 1;
}

}  // namespace detail_graph

// Evaluates the logits node given all graph inputs in binding order.
// Train mode updates batchnorm running statistics (single-writer on model).
template <typename S>
const Tensor<S>& forward(const NetworkSpec& spec, ModelT<S>& model,
                         const std::vector<const Tensor<S>*>& inputs, bool train,
                         ForwardPass<S>& fp) {
  if (inputs.size() != spec.inputs.size())
    throw ValidationError("expected " + std::to_string(spec.inputs.size()) +
                          " network inputs, got " + std::to_string(inputs.size()));
  fp.reset(spec.nodes.size(), train);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const InputInfo& info = spec.input_info[i];
    if (inputs[i]->c != info.c)
      throw ValidationError("input '" + info.name + "' expects " + std::to_string(info.c) +
                            " channels, got " + std::to_string(inputs[i]->c));
    if (info.h > 0 && (inputs[i]->h != info.h || inputs[i]->w != info.w))
      throw ValidationError("input '" + info.name + "' expects " + std::to_string(info.h) +
                            "x" + std::to_string(info.w) + " patches");
    fp.act[spec.inputs[i]] = *inputs[i];
    fp.computed[spec.inputs[i]] = 1;
  }
  for (int id = 0; id <= spec.output; ++id) {
    if (fp.computed[id]) continue;
    detail_graph::eval_node(spec, model, id, fp);
  }
  return fp.act[spec.output];
}

// Evaluates only the ancestors of `target` given a subset of bound inputs.
// The dense sliding-free predictor uses this to run single pathways on whole
// padded slices.
template <typename S>
const Tensor<S>& forward_to(const NetworkSpec& spec, ModelT<S>& model, int target,
                            const std::map<int, const Tensor<S>*>& bound, bool train,
                            ForwardPass<S>& fp) {
  fp.reset(spec.nodes.size(), train);
  for (const auto& [id, tensor] : bound) {
    fp.act[id] = *tensor;
    fp.computed[id] = 1;
  }
  // Mark required ancestors.
  std::vector<char> needed(spec.nodes.size(), 0);
  needed[target] = 1;
  for (int id = target; id >= 0; --id) {
    if (!needed[id] || fp.computed[id]) continue;
    for (int src : spec.nodes[id].inputs) needed[src] = 1;
  }
  for (int id = 0; id <= target; ++id) {
    if (!needed[id] || fp.computed[id]) continue;
    detail_graph::eval_node(spec, model, id, fp);
  }
  return fp.act[target];
}

// Backpropagates d(loss)/d(logits) through every computed node, accumulating
// parameter gradients (grads must be reset_like'd by the caller).
template <typename S>
void backward(const NetworkSpec& spec, const ModelT<S>& model, const ForwardPass<S>& fp,
              const Tensor<S>& dlogits, Gradients<S>& grads) {
  std::vector<Tensor<S>> dact(spec.nodes.size());
  auto accumulate = [&](int id, Tensor<S>&& g) {
    if (dact[id].v.empty())
      dact[id] = std::move(g);
    else
      for (std::size_t i = 0; i < g.v.size(); ++i) dact[id].v[i] += g.v[i];
  };
  dact[spec.output] = dlogits;

  for (int id = spec.output; id >= 0; --id) {
    if (!fp.computed[id] || dact[id].v.empty()) continue;
    const LayerNode& node = spec.nodes[id];
    if (node.kind == LayerKind::input) continue;
    const int src = node.inputs.empty() ? -1 : node.inputs[0];
    const NodeParams<S>& p = model.params[id];
    switch (node.kind) {
      case LayerKind::linear_map:
        accumulate(src, ops::scale_backward(dact[id], node.scale));
        break;
      case LayerKind::conv: {
        Tensor<S> din;
        std::vector<S> dw, db;
        ops::conv2d_backward(fp.act[src], p.w, dact[id], node.kh, node.kw, node.out_channels,
                             node.padding, din, dw, db);
        for (std::size_t i = 0; i < dw.size(); ++i) grads.params[id].w[i] += dw[i];
        for (std::size_t i = 0; i < db.size(); ++i) grads.params[id].b[i] += db[i];
        accumulate(src, std::move(din));
        break;
      }
      case LayerKind::relu:
        accumulate(src, ops::relu_backward(fp.act[id], dact[id]));
        break;
      case LayerKind::batchnorm: {
        std::vector<S> dgamma, dbeta;
        Tensor<S> din = ops::batchnorm_backward(dact[id], p.w, fp.bn_invstd[id],
                                                fp.bn_xhat[id], dgamma, dbeta);
        for (std::size_t i = 0; i < dgamma.size(); ++i) grads.params[id].w[i] += dgamma[i];
        for (std::size_t i = 0; i < dbeta.size(); ++i) grads.params[id].b[i] += dbeta[i];
        accumulate(src, std::move(din));
        break;
      }
      case LayerKind::maxpool:
        accumulate(src, ops::maxpool2_backward(dact[id], fp.pool_argmax[id], fp.act[src].h,
                                               fp.act[src].w));
        break;
      case LayerKind::upsample:
        accumulate(src, ops::upsample2_backward(dact[id]));
        break;
      case LayerKind::concat: {
        std::vector<const Tensor<S>*> parts;
        for (int s : node.inputs) parts.push_back(&fp.act[s]);
        auto dins = ops::concat_backward(dact[id], parts);
        for (std::size_t i = 0; i < dins.size(); ++i)
          accumulate(node.inputs[i], std::move(dins[i]));
        break;
      }
      default:
        break;
    }
    dact[id] = Tensor<S>();  // free as we go
  }
}

}  // namespace autonet
