#include "mmsim/network.hpp"

#include <cmath>

#include "mmsim/errors.hpp"

namespace mmsim {

ActorCritic::ActorCritic(NetworkShape shape) : shape_(std::move(shape)) {
  if (shape_.input_dim == 0 || shape_.action_dim == 0) {
    throw ContractViolation("network needs non-zero input and action dimensions");
  }
  for (std::size_t h : shape_.hidden) {
    if (h == 0) throw ContractViolation("hidden layer width must be positive");
  }
  build_layout();
}

void ActorCritic::build_layout() {
  std::size_t offset = 0;
  auto dense = [&offset](std::size_t in, std::size_t out) {
    Dense d{in, out, offset, offset + in * out};
    offset += in * out + out;
    return d;
  };
  std::size_t width = shape_.input_dim;
  trunk_.clear();
  for (std::size_t h : shape_.hidden) {
    trunk_.push_back(dense(width, h));
    width = h;
  }
  actor_ = dense(width, shape_.action_dim);
  log_std_ = offset;
  offset += shape_.action_dim;
  critic_ = dense(width, 1);
  params_.assign(offset, 0.0);
}

ActorCritic ActorCritic::initialized(NetworkShape shape, Rng& rng, double initial_log_std) {
  ActorCritic net(std::move(shape));
  auto fill = [&](const Dense& d, double gain) {
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(d.in + d.out));
    for (std::size_t i = 0; i < d.in * d.out; ++i) {
      net.params_[d.weights + i] = rng.uniform(-bound, bound);
    }
  };
  for (const Dense& d : net.trunk_) fill(d, std::sqrt(2.0));
  fill(net.actor_, 0.01);
  fill(net.critic_, 1.0);
  for (std::size_t i = 0; i < net.shape_.action_dim; ++i) {
    net.params_[net.log_std_ + i] = initial_log_std;
  }
  return net;
}

std::span<const double> ActorCritic::log_std() const noexcept {
  return std::span<const double>(params_).subspan(log_std_, shape_.action_dim);
}

std::span<double> ActorCritic::actor_bias() noexcept {
  return std::span<double>(params_).subspan(actor_.bias, actor_.out);
}

std::span<const double> ActorCritic::actor_bias() const noexcept {
  return std::span<const double>(params_).subspan(actor_.bias, actor_.out);
}

void ActorCritic::dense_forward(const Dense& layer, std::span<const double> x,
                                std::span<double> y) const {
  const double* w = params_.data() + layer.weights;
  const double* b = params_.data() + layer.bias;
  for (std::size_t o = 0; o < layer.out; ++o) {
    double acc = b[o];
    const double* row = w + o * layer.in;
    for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

ActorCritic::Pass ActorCritic::forward(std::span<const double> input) const {
  if (input.size() != shape_.input_dim) {
    throw ContractViolation("network input has " + std::to_string(input.size()) +
                            " features, expected " + std::to_string(shape_.input_dim));
  }
  Pass pass;
  pass.activations.reserve(trunk_.size() + 1);
  pass.activations.emplace_back(input.begin(), input.end());
  for (const Dense& layer : trunk_) {
    std::vector<double> y(layer.out);
    dense_forward(layer, pass.activations.back(), y);
    for (double& v : y) v = std::tanh(v);
    pass.activations.push_back(std::move(y));
  }
  const auto& features = pass.activations.back();
  pass.mean.resize(actor_.out);
  dense_forward(actor_, features, pass.mean);
  double value = 0.0;
  dense_forward(critic_, features, std::span<double>(&value, 1));
  pass.value = value;
  return pass;
}

void ActorCritic::backward(const Pass& pass, std::span<const double> d_mean, double d_value,
                           std::span<const double> d_log_std, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ContractViolation("gradient buffer size mismatch");
  const auto& features = pass.activations.back();
  std::vector<double> d_features(features.size(), 0.0);

  auto head_backward = [&](const Dense& d, std::span<const double> d_out) {
    const double* w = params_.data() + d.weights;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double g = d_out[o];
      if (g == 0.0) continue;
      grad[d.bias + o] += g;
      double* gw = grad.data() + d.weights + o * d.in;
      const double* row = w + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) {
        gw[i] += g * features[i];
        d_features[i] += g * row[i];
      }
    }
  };
  head_backward(actor_, d_mean);
  head_backward(critic_, std::span<const double>(&d_value, 1));
  add_log_std_gradient(d_log_std, grad);

  std::vector<double> d_out = std::move(d_features);
  for (std::size_t l = trunk_.size(); l-- > 0;) {
    const Dense& d = trunk_[l];
    const auto& y = pass.activations[l + 1];
    const auto& x = pass.activations[l];
    std::vector<double> d_in(d.in, 0.0);
    const double* w = params_.data() + d.weights;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double g = d_out[o] * (1.0 - y[o] * y[o]);
      if (g == 0.0) continue;
      grad[d.bias + o] += g;
      double* gw = grad.data() + d.weights + o * d.in;
      const double* row = w + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) {
        gw[i] += g * x[i];
        d_in[i] += g * row[i];
      }
    }
    d_out = std::move(d_in);
  }
}

void ActorCritic::add_log_std_gradient(std::span<const double> d_log_std,
                                       std::span<double> grad) const {
  if (grad.size() != params_.size() || d_log_std.size() != shape_.action_dim) {
    throw ContractViolation("log-std gradient size mismatch");
  }
  for (std::size_t i = 0; i < shape_.action_dim; ++i) grad[log_std_ + i] += d_log_std[i];
}

}  // namespace mmsim
