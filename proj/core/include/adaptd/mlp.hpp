#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adaptd/mdp.hpp"
#include "adaptd/rng.hpp"

namespace adaptd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Fully connected ReLU network with a scalar linear output.
///
/// Parameters live in one flat vector. For each layer (in order) the weight
/// matrix is stored row-major as (fan_out x fan_in), followed by its bias.
struct MlpShape {
  std::size_t inputs = 2;
  std::vector<std::size_t> hidden{50, 50};

  std::size_t layer_count() const noexcept { return hidden.size() + 1; }
  std::size_t fan_in(std::size_t layer) const;
  std::size_t fan_out(std::size_t layer) const;
  /// Offset of layer `layer`'s weights in the flat vector; bias follows them.
  std::size_t offset(std::size_t layer) const;
  std::size_t param_count() const;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
std::vector<double> mlp_init(const MlpShape& shape, Rng& rng);

/// Network output for one input vector.
double mlp_forward(const MlpShape& shape, std::span<const double> params, std::span<const double> input);

/// Mean squared error over a minibatch. `inputs` is row-major (batch x inputs).
double mlp_loss(const MlpShape& shape, std::span<const double> params, std::span<const double> inputs,
                std::span<const double> targets);

/// Exact gradient of mlp_loss with respect to every parameter, by
/// backpropagation. Same layout as the parameter vector. The loss at
/// `params` is written to `loss` when it is non-null.
std::vector<double> mlp_gradient(const MlpShape& shape, std::span<const double> params,
                                 std::span<const double> inputs, std::span<const double> targets,
                                 double* loss = nullptr);

class Adam {
 public:
  Adam(std::size_t size, AdamConfig cfg);

  void step(std::span<double> params, std::span<const double> grad);

  std::size_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  std::span<const double> first_moment() const noexcept { return m_; }
  std::span<const double> second_moment() const noexcept { return v_; }
  void restore(std::size_t t, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

struct MlpConfig {
  MlpShape shape;
  AdamConfig adam;
  std::size_t batch_size = 512;
  /// Inputs are mapped affinely from this box onto [-1, 1]^2.
  Box input_box{-1.0, 1.0, -1.0, 1.0};
  /// Predictions are output_scale * network(x); targets are divided by it
  /// before the loss is taken.
  double output_scale = 1.0;

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

}  // namespace adaptd
