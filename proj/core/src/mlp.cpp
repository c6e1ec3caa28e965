#include "adaptd/mlp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "adaptd/approximator.hpp"

namespace adaptd {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMajorMatrix>;
using Weights = Eigen::Map<RowMajorMatrix>;
using ConstBias = Eigen::Map<const Eigen::VectorXd>;
using Bias = Eigen::Map<Eigen::VectorXd>;

void check_params(const MlpShape& shape, std::span<const double> params) {
  if (params.size() != shape.param_count()) throw std::invalid_argument("mlp: parameter vector has the wrong size");
}

// Column-major view (inputs x batch) over row-major (batch x inputs) storage.
Eigen::Map<const Matrix> batch_view(const MlpShape& shape, std::span<const double> inputs, std::size_t batch) {
  if (inputs.size() != batch * shape.inputs) throw std::invalid_argument("mlp: input buffer has the wrong size");
  return {inputs.data(), static_cast<Eigen::Index>(shape.inputs), static_cast<Eigen::Index>(batch)};
}

struct ForwardPass {
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // post[0] = input, post[l + 1] = relu(pre[l]) for hidden layers
};

ForwardPass forward(const MlpShape& shape, std::span<const double> params, const Eigen::Ref<const Matrix>& x) {
  ForwardPass f;
  const std::size_t layers = shape.layer_count();
  f.pre.resize(layers);
  f.post.resize(layers);
  f.post[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(shape.fan_in(l));
    const auto out = static_cast<Eigen::Index>(shape.fan_out(l));
    ConstWeights w(params.data() + shape.offset(l), out, in);
    ConstBias b(params.data() + shape.offset(l) + out * in, out);
    f.pre[l] = w * f.post[l];
    f.pre[l].colwise() += b;
    if (l + 1 < layers) f.post[l + 1] = f.pre[l].cwiseMax(0.0);
  }
  return f;
}

}  // namespace

std::size_t MlpShape::fan_in(std::size_t layer) const {
  if (layer >= layer_count()) throw std::out_of_range("mlp: layer index");
  return layer == 0 ? inputs : hidden[layer - 1];
}

std::size_t MlpShape::fan_out(std::size_t layer) const {
  if (layer >= layer_count()) throw std::out_of_range("mlp: layer index");
  return layer + 1 == layer_count() ? 1 : hidden[layer];
}

std::size_t MlpShape::offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += fan_out(l) * (fan_in(l) + 1);
  return off;
}

std::size_t MlpShape::param_count() const { return offset(layer_count()); }

std::vector<double> mlp_init(const MlpShape& shape, Rng& rng) {
  if (shape.inputs == 0) throw std::invalid_argument("mlp: need at least one input");
  for (std::size_t h : shape.hidden) {
    if (h == 0) throw std::invalid_argument("mlp: hidden layers must be non-empty");
  }
  std::vector<double> params(shape.param_count(), 0.0);
  for (std::size_t l = 0; l < shape.layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(shape.fan_in(l) + shape.fan_out(l)));
    const std::size_t n = shape.fan_in(l) * shape.fan_out(l);
    for (std::size_t i = 0; i < n; ++i) params[shape.offset(l) + i] = limit * (2.0 * uniform01(rng) - 1.0);
  }
  return params;
}

double mlp_forward(const MlpShape& shape, std::span<const double> params, std::span<const double> input) {
  check_params(shape, params);
  const ForwardPass f = forward(shape, params, batch_view(shape, input, 1));
  return f.pre.back()(0, 0);
}

double mlp_loss(const MlpShape& shape, std::span<const double> params, std::span<const double> inputs,
                std::span<const double> targets) {
  check_params(shape, params);
  if (targets.empty()) throw std::invalid_argument("mlp: empty minibatch");
  const ForwardPass f = forward(shape, params, batch_view(shape, inputs, targets.size()));
  const Eigen::Map<const Eigen::RowVectorXd> t(targets.data(), static_cast<Eigen::Index>(targets.size()));
  return (f.pre.back() - t).squaredNorm() / static_cast<double>(targets.size());
}

std::vector<double> mlp_gradient(const MlpShape& shape, std::span<const double> params,
                                 std::span<const double> inputs, std::span<const double> targets, double* loss) {
  check_params(shape, params);
  if (targets.empty()) throw std::invalid_argument("mlp: empty minibatch");
  const std::size_t batch = targets.size();
  const ForwardPass f = forward(shape, params, batch_view(shape, inputs, batch));
  const Eigen::Map<const Eigen::RowVectorXd> t(targets.data(), static_cast<Eigen::Index>(batch));

  std::vector<double> grad(params.size(), 0.0);
  // d(mean squared error)/d(output)
  Matrix delta = f.pre.back() - t;
  if (loss != nullptr) *loss = delta.squaredNorm() / static_cast<double>(batch);
  delta *= 2.0 / static_cast<double>(batch);
  for (std::size_t l = shape.layer_count(); l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(shape.fan_in(l));
    const auto out = static_cast<Eigen::Index>(shape.fan_out(l));
    Weights gw(grad.data() + shape.offset(l), out, in);
    Bias gb(grad.data() + shape.offset(l) + out * in, out);
    gw.noalias() = delta * f.post[l].transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    ConstWeights w(params.data() + shape.offset(l), out, in);
    Matrix back = w.transpose() * delta;
    delta = back.cwiseProduct((f.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return grad;
}

// --- Adam -------------------------------------------------------------------

Adam::Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
      !(cfg.epsilon > 0.0)) {
    throw std::invalid_argument("adam: invalid hyper-parameters");
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

void Adam::restore(std::size_t t, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw std::invalid_argument("adam: restore size mismatch");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

// --- MlpApprox --------------------------------------------------------------

MlpApprox::MlpApprox(MlpConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed), adam_(cfg_.shape.param_count(), cfg_.adam), sampler_(make_rng(derive_seed(seed, 1))) {
  if (cfg_.shape.inputs != 2) throw std::invalid_argument("mlp approximator: states are 2-D");
  if (cfg_.batch_size == 0) throw std::invalid_argument("mlp approximator: batch size must be positive");
  if (!(cfg_.output_scale > 0.0)) throw std::invalid_argument("mlp approximator: output scale must be positive");
  if (!(cfg_.input_box.width() > 0.0) || !(cfg_.input_box.height() > 0.0)) {
    throw std::invalid_argument("mlp approximator: degenerate input box");
  }
  Rng init = make_rng(derive_seed(seed, 0));
  params_ = mlp_init(cfg_.shape, init);
}

std::array<double, 2> MlpApprox::normalise(const State& s) const {
  const Box& b = cfg_.input_box;
  return {2.0 * (s.x() - b.x_min) / b.width() - 1.0, 2.0 * (s.y() - b.y_min) / b.height() - 1.0};
}

double MlpApprox::predict(const State& s) const {
  const auto x = normalise(s);
  return cfg_.output_scale * mlp_forward(cfg_.shape, params_, x);
}

double MlpApprox::train_batch(std::span<const State> states, std::span<const double> targets) {
  check_fit_inputs(states, targets);
  std::vector<double> inputs;
  inputs.reserve(2 * states.size());
  std::vector<double> scaled(targets.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto x = normalise(states[i]);
    inputs.push_back(x[0]);
    inputs.push_back(x[1]);
    scaled[i] = targets[i] / cfg_.output_scale;
  }
  double loss = 0.0;
  const std::vector<double> grad = mlp_gradient(cfg_.shape, params_, inputs, scaled, &loss);
  adam_.step(params_, grad);
  for (double p : params_) {
    if (!std::isfinite(p)) throw std::runtime_error("mlp approximator: parameters diverged");
  }
  return loss * cfg_.output_scale * cfg_.output_scale;
}

void MlpApprox::fit(std::span<const State> states, std::span<const double> targets, std::size_t budget) {
  check_fit_inputs(states, targets);
  std::vector<State> batch_states(cfg_.batch_size);
  std::vector<double> batch_targets(cfg_.batch_size);
  for (std::size_t step = 0; step < budget; ++step) {
    for (std::size_t i = 0; i < cfg_.batch_size; ++i) {
      const std::size_t j = uniform_index(sampler_, states.size());
      batch_states[i] = states[j];
      batch_targets[i] = targets[j];
    }
    train_batch(batch_states, batch_targets);
  }
}

std::unique_ptr<ValueApproximator> MlpApprox::clone() const { return std::make_unique<MlpApprox>(*this); }

std::unique_ptr<ValueApproximator> MlpApprox::fresh(std::uint64_t seed) const {
  return std::make_unique<MlpApprox>(cfg_, seed);
}

void MlpApprox::set_params(std::vector<double> params) {
  check_params(cfg_.shape, params);
  params_ = std::move(params);
}

void MlpApprox::restore_optimizer(std::size_t t, std::vector<double> m, std::vector<double> v) {
  adam_.restore(t, std::move(m), std::move(v));
}

}  // namespace adaptd
