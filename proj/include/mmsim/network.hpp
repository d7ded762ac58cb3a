#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmsim/random.hpp"

namespace mmsim {

struct NetworkShape {
  std::size_t input_dim = 4;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t action_dim = 2;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Feed-forward actor-critic: a shared tanh trunk feeding a linear actor head
/// (Gaussian means), a state-independent log-std vector, and a linear critic.
///
/// All weights live in one flat vector, laid out as
///   [trunk W_0, b_0, ..., W_k, b_k | actor W, actor b | log_std | critic W, critic b]
/// with row-major (out x in) weight matrices.
class ActorCritic {
 public:
  struct Pass {
    /// activations[0] is the input; activations[l + 1] the tanh output of trunk layer l.
    std::vector<std::vector<double>> activations;
    std::vector<double> mean;
    double value = 0.0;
  };

  ActorCritic() = default;
  /// All-zero parameters.
  explicit ActorCritic(NetworkShape shape);

  /// Scaled-uniform init: trunk gain sqrt(2), actor gain 0.01, critic gain 1,
  /// zero biases (the actor output bias in particular), log-std constant.
  static ActorCritic initialized(NetworkShape shape, Rng& rng, double initial_log_std = 0.0);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::span<const double> log_std() const noexcept;
  std::span<double> actor_bias() noexcept;
  std::span<const double> actor_bias() const noexcept;

  Pass forward(std::span<const double> input) const;

  /// Adds dL/dparams to `grad` given the loss derivatives w.r.t. the means,
  /// the value, and the log-std vector.
  void backward(const Pass& pass, std::span<const double> d_mean, double d_value,
                std::span<const double> d_log_std, std::span<double> grad) const;

  /// Adds `d_log_std` to the log-std block of `grad`.
  void add_log_std_gradient(std::span<const double> d_log_std, std::span<double> grad) const;

 private:
  struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weights = 0;  // offset
    std::size_t bias = 0;     // offset
  };

  void build_layout();
  void dense_forward(const Dense& layer, std::span<const double> x, std::span<double> y) const;

  NetworkShape shape_;
  std::vector<Dense> trunk_;
  Dense actor_;
  Dense critic_;
  std::size_t log_std_ = 0;
  std::vector<double> params_;
};

}  // namespace mmsim
