#include "autonet/train.hpp"

#include <cmath>
#include <numeric>

#include "autonet/rng.hpp"

namespace autonet {

void Adam::init(const Model& model, const TrainSchedule& schedule) {
  beta1 = schedule.beta1;
  beta2 = schedule.beta2;
  epsilon = schedule.epsilon;
  t = 0;
  m.resize(model.params.size());
  v.resize(model.params.size());
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    m[i].w.assign(model.params[i].w.size(), 0.0f);
    m[i].b.assign(model.params[i].b.size(), 0.0f);
    v[i].w.assign(model.params[i].w.size(), 0.0f);
    v[i].b.assign(model.params[i].b.size(), 0.0f);
  }
}

void Adam::step(Model& model, const Gradients<float>& grads, double lr) {
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  auto update = [&](std::vector<float>& theta, std::vector<float>& m1, std::vector<float>& m2,
                    const std::vector<float>& g) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m1[i] = static_cast<float>(beta1 * m1[i] + (1.0 - beta1) * g[i]);
      m2[i] = static_cast<float>(beta2 * m2[i] + (1.0 - beta2) * g[i] * g[i]);
      const double mhat = m1[i] / bc1;
      const double vhat = m2[i] / bc2;
      theta[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + epsilon));
    }
  };
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    update(model.params[i].w, m[i].w, v[i].w, grads.params[i].w);
    update(model.params[i].b, m[i].b, v[i].b, grads.params[i].b);
  }
}

namespace {

// Stacks the chosen samples into one batch per network input slot.
void stack_batch(const std::vector<const TrainSample*>& samples,
                 const std::vector<std::size_t>& order, std::size_t lo, std::size_t hi,
                 std::vector<Tensor<float>>& inputs, std::vector<std::uint8_t>& labels,
                 Tensor<float>& offsets, bool& any_offset) {
  const TrainSample& first = *samples[order[lo]];
  const std::size_t slots = first.inputs.size();
  inputs.resize(slots);
  const int batch = static_cast<int>(hi - lo);
  for (std::size_t s = 0; s < slots; ++s) {
    const Tensor<float>& proto = first.inputs[s];
    inputs[s] = Tensor<float>(batch, proto.h, proto.w, proto.c);
    for (std::size_t b = lo; b < hi; ++b) {
      const Tensor<float>& src = samples[order[b]]->inputs[s];
      std::copy(src.v.begin(), src.v.end(),
                inputs[s].v.begin() + static_cast<std::size_t>(b - lo) * src.v.size());
    }
  }
  labels.clear();
  for (std::size_t b = lo; b < hi; ++b)
    labels.insert(labels.end(), samples[order[b]]->labels.begin(),
                  samples[order[b]]->labels.end());
  any_offset = first.has_offset();
  if (any_offset) {
    const Tensor<float>& proto = first.logit_offset;
    offsets = Tensor<float>(batch, proto.h, proto.w, proto.c);
    for (std::size_t b = lo; b < hi; ++b) {
      const Tensor<float>& src = samples[order[b]]->logit_offset;
      std::copy(src.v.begin(), src.v.end(),
                offsets.v.begin() + static_cast<std::size_t>(b - lo) * src.v.size());
    }
  }
}

}  // namespace

TrainLog train_network(const NetworkSpec& spec, Model& model, Adam& adam,
                       const std::vector<const TrainSample*>& samples,
                       const TrainOptions& options) {
  if (samples.empty()) throw ValidationError("training requires a nonempty dataset");
  TrainLog log;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  Rng rng(options.shuffle_seed);

  ForwardPass<float> fp;
  Gradients<float> grads;
  std::vector<Tensor<float>> batch_inputs;
  std::vector<std::uint8_t> batch_labels;
  Tensor<float> batch_offsets, dlogits;

  const int batch_size = std::max(1, options.batch_size);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, i - 1));
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
      const std::size_t hi = std::min(order.size(), lo + batch_size);
      bool any_offset = false;
      stack_batch(samples, order, lo, hi, batch_inputs, batch_labels, batch_offsets,
                  any_offset);
      std::vector<const Tensor<float>*> input_ptrs;
      for (const auto& t : batch_inputs) input_ptrs.push_back(&t);

      const Tensor<float>& logits = forward(spec, model, input_ptrs, /*train=*/true, fp);
      const double loss =
          softmax_ce_loss_grad(logits, batch_labels, options.class_weights,
                               any_offset ? &batch_offsets : nullptr, dlogits);
      if (!std::isfinite(loss))
        throw TrainingError("training diverged: non-finite loss at optimizer step " +
                            std::to_string(adam.t) + " (lr " +
                            std::to_string(options.learning_rate) + ", epoch " +
                            std::to_string(epoch) + ")");
      grads.reset_like(model);
      backward(spec, model, fp, dlogits, grads);

      double lr = options.learning_rate;
      if (options.lr_decay_steps > 0 && options.lr_decay != 1.0)
        for (std::int64_t s = options.lr_decay_steps; s <= adam.t; s += options.lr_decay_steps)
          lr *= options.lr_decay;
      adam.step(model, grads, lr);

      epoch_loss += loss * static_cast<double>(hi - lo);
      epoch_count += hi - lo;
      ++log.steps;
    }
    log.epoch_loss.push_back(epoch_loss / static_cast<double>(epoch_count));
  }
  return log;
}

}  // namespace autonet
