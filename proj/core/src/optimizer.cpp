#include "mphate/optimizer.hpp"

#include <cmath>
#include <string>

#include "mphate/error.hpp"

namespace mphate {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kAdagrad: return "adagrad";
  }
  return "sgd";
}

OptimizerKind parse_optimizer(const std::string& name) {
  for (OptimizerKind k : {OptimizerKind::kSgd, OptimizerKind::kAdam, OptimizerKind::kAdagrad}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown optimizer '" + name + "'");
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate, const Network& net) {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  OptimizerState state;
  state.kind = kind;
  state.learning_rate = learning_rate;
  for (const Matrix& p : net.params) {
    state.first.push_back(Matrix::Zero(p.rows(), p.cols()));
    state.second.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  state.steps.assign(net.params.size(), 0);
  return state;
}

void step_sgd(Matrix& param, const Matrix& grad, double learning_rate) { param -= learning_rate * grad; }

void step_adam(Matrix& param, const Matrix& grad, Matrix& first, Matrix& second, std::size_t& count,
               const OptimizerState& s) {
  ++count;
  first = s.beta1 * first + (1.0 - s.beta1) * grad;
  second = s.beta2 * second + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(count));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(count));
  param.array() -= s.learning_rate * (first.array() / c1) / ((second.array() / c2).sqrt() + s.epsilon);
}

void step_adagrad(Matrix& param, const Matrix& grad, Matrix& accumulator, const OptimizerState& s) {
  accumulator += grad.cwiseProduct(grad);
  param.array() -= s.learning_rate * grad.array() / (accumulator.array().sqrt() + s.epsilon);
}

void step(OptimizerState& state, Network& net, const Network& grads, const std::vector<bool>& active) {
  if (grads.params.size() != net.params.size() || state.steps.size() != net.params.size()) {
    throw ConsistencyError("optimizer state does not match the network");
  }
  if (!active.empty() && active.size() != net.params.size()) throw ConsistencyError("active mask size mismatch");
  for (std::size_t i = 0; i < net.params.size(); ++i) {
    if (!active.empty() && !active[i]) continue;
    switch (state.kind) {
      case OptimizerKind::kSgd:
        step_sgd(net.params[i], grads.params[i], state.learning_rate);
        ++state.steps[i];
        break;
      case OptimizerKind::kAdam:
        step_adam(net.params[i], grads.params[i], state.first[i], state.second[i], state.steps[i], state);
        break;
      case OptimizerKind::kAdagrad:
        step_adagrad(net.params[i], grads.params[i], state.first[i], state);
        ++state.steps[i];
        break;
    }
  }
}

}  // namespace mphate
