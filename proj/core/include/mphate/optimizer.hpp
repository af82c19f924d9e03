#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mphate/mlp.hpp"

namespace mphate {

enum class OptimizerKind { kSgd, kAdam, kAdagrad };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

/// Per-tensor optimizer state. Step counts are per tensor, so tensors left out
/// of an update (inactive heads) neither move nor age.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Adam first moments, or the Adagrad accumulators.
  std::vector<Matrix> first;
  /// Adam second moments.
  std::vector<Matrix> second;
  std::vector<std::size_t> steps;
};

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate, const Network& net);

/// One update of every tensor whose `active` flag is set (all when empty).
void step(OptimizerState& state, Network& net, const Network& grads, const std::vector<bool>& active = {});

void step_sgd(Matrix& param, const Matrix& grad, double learning_rate);
void step_adam(Matrix& param, const Matrix& grad, Matrix& first, Matrix& second, std::size_t& count,
               const OptimizerState& settings);
void step_adagrad(Matrix& param, const Matrix& grad, Matrix& accumulator, const OptimizerState& settings);

}  // namespace mphate
