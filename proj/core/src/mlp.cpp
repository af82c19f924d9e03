#include "mphate/mlp.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/random.hpp"

namespace mphate {

std::string to_string(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "leaky_relu";
}

std::string to_string(Regularizer regularizer) {
  switch (regularizer) {
    case Regularizer::kNone: return "none";
    case Regularizer::kKernelL1: return "kernel_l1";
    case Regularizer::kKernelL2: return "kernel_l2";
    case Regularizer::kActivityL1: return "activity_l1";
    case Regularizer::kActivityL2: return "activity_l2";
  }
  return "none";
}

Regularizer parse_regularizer(const std::string& name) {
  for (Regularizer r : {Regularizer::kNone, Regularizer::kKernelL1, Regularizer::kKernelL2,
                        Regularizer::kActivityL1, Regularizer::kActivityL2}) {
    if (to_string(r) == name) return r;
  }
  throw ValidationError("unknown regularizer '" + name + "'");
}

void Architecture::validate() const {
  if (inputs == 0 || outputs == 0 || heads == 0) throw ValidationError("architecture needs inputs, outputs and heads");
  for (std::size_t h : hidden)
    if (h == 0) throw ValidationError("hidden layers must have at least one unit");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ValidationError("dropout keep probability must lie in (0, 1]");
  if (!(reg_weight >= 0.0)) throw ValidationError("regularization weight must be nonnegative");
  if (!(leaky_slope >= 0.0)) throw ValidationError("leaky slope must be nonnegative");
}

std::size_t Architecture::hidden_units() const {
  std::size_t total = 0;
  for (std::size_t h : hidden) total += h;
  return total;
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const Matrix& p : params) total += static_cast<std::size_t>(p.size());
  return total;
}

double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

Network init_network(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  Network net;
  net.arch = arch;
  auto add_layer = [&](std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
    net.params.push_back(std::move(w));
    net.params.push_back(Matrix::Zero(1, static_cast<Eigen::Index>(fan_out)));
  };
  std::size_t fan_in = arch.inputs;
  for (std::size_t width : arch.hidden) {
    add_layer(fan_in, width);
    fan_in = width;
  }
  for (std::size_t h = 0; h < arch.heads; ++h) add_layer(fan_in, arch.outputs);
  return net;
}

Network zeros_like(const Network& net) {
  Network out;
  out.arch = net.arch;
  for (const Matrix& p : net.params) out.params.push_back(Matrix::Zero(p.rows(), p.cols()));
  return out;
}

namespace {

void check_batch(const Network& net, const Matrix& batch, std::span<const int> heads) {
  if (static_cast<std::size_t>(batch.cols()) != net.arch.inputs) {
    throw ConsistencyError("batch has " + std::to_string(batch.cols()) + " features, network expects " +
                           std::to_string(net.arch.inputs));
  }
  if (!heads.empty() && heads.size() != static_cast<std::size_t>(batch.rows())) {
    throw ConsistencyError("head selection does not match batch size");
  }
  for (int h : heads) {
    if (h < 0 || static_cast<std::size_t>(h) >= net.arch.heads) throw ValidationError("head index out of range");
  }
}

double activate(double z, const Architecture& arch) {
  return arch.activation == Activation::kRelu ? (z > 0.0 ? z : 0.0) : leaky_relu(z, arch.leaky_slope);
}

double activation_slope(double z, const Architecture& arch) {
  if (z > 0.0) return 1.0;
  return arch.activation == Activation::kRelu ? 0.0 : arch.leaky_slope;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

int head_of(std::span<const int> heads, Eigen::Index row) {
  return heads.empty() ? 0 : heads[static_cast<std::size_t>(row)];
}

}  // namespace

ForwardPass forward(const Network& net, const Matrix& batch, std::span<const int> heads, bool train,
                    std::uint64_t dropout_seed) {
  check_batch(net, batch, heads);
  const Architecture& arch = net.arch;
  const bool dropout = train && arch.keep_prob < 1.0;
  Rng rng(dropout_seed);
  ForwardPass pass;
  Matrix input = batch;
  for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
    Matrix z = input * net.params[2 * l];
    z.rowwise() += net.params[2 * l + 1].row(0);
    Matrix a = z.unaryExpr([&](double v) { return activate(v, arch); });
    input = a;
    if (dropout) {
      Matrix mask(a.rows(), a.cols());
      for (Eigen::Index c = 0; c < mask.cols(); ++c)
        for (Eigen::Index r = 0; r < mask.rows(); ++r)
          mask(r, c) = uniform01(rng) < arch.keep_prob ? 1.0 / arch.keep_prob : 0.0;
      input = input.cwiseProduct(mask);
      pass.masks.push_back(std::move(mask));
    }
    pass.pre.push_back(std::move(z));
    pass.activations.push_back(std::move(a));
  }

  const auto rows = batch.rows();
  pass.logits.resize(rows, static_cast<Eigen::Index>(arch.outputs));
  for (std::size_t h = 0; h < arch.heads; ++h) {
    const Matrix& w = net.params[net.head_index(h)];
    const Matrix& b = net.params[net.head_index(h) + 1];
    if (heads.empty() && h > 0) break;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (head_of(heads, r) != static_cast<int>(h)) continue;
      pass.logits.row(r) = input.row(r) * w + b;
    }
  }
  pass.probs.resize(rows, pass.logits.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double top = pass.logits.row(r).maxCoeff();
    const auto e = (pass.logits.row(r).array() - top).exp();
    pass.probs.row(r) = e / e.sum();
  }
  return pass;
}

LossResult loss_and_grads(const Network& net, const Matrix& batch, std::span<const int> labels,
                          std::span<const int> heads, bool train, std::uint64_t dropout_seed,
                          Network* grads) {
  if (labels.size() != static_cast<std::size_t>(batch.rows())) throw ConsistencyError("labels do not match batch size");
  if (batch.rows() == 0) throw ValidationError("empty batch");
  const Architecture& arch = net.arch;
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= arch.outputs) throw ValidationError("label outside the output range");
  }
  const ForwardPass pass = forward(net, batch, heads, train, dropout_seed);
  const auto rows = batch.rows();
  const double inv_batch = 1.0 / static_cast<double>(rows);
  const std::size_t layers = arch.hidden.size();

  LossResult result;
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double top = pass.logits.row(r).maxCoeff();
    const double lse = top + std::log((pass.logits.row(r).array() - top).exp().sum());
    const int y = labels[static_cast<std::size_t>(r)];
    result.cross_entropy += lse - pass.logits(r, y);
    Eigen::Index best = 0;
    pass.logits.row(r).maxCoeff(&best);
    if (best == y) ++correct;
  }
  result.cross_entropy *= inv_batch;
  result.accuracy = static_cast<double>(correct) * inv_batch;

  double penalty = 0.0;
  const double w = arch.reg_weight;
  switch (arch.regularizer) {
    case Regularizer::kNone: break;
    case Regularizer::kKernelL1:
      for (std::size_t l = 0; l < layers; ++l) penalty += w * net.params[2 * l].cwiseAbs().sum();
      break;
    case Regularizer::kKernelL2:
      for (std::size_t l = 0; l < layers; ++l) penalty += w * net.params[2 * l].squaredNorm();
      break;
    case Regularizer::kActivityL1:
      for (const Matrix& a : pass.activations) penalty += w * inv_batch * a.cwiseAbs().sum();
      break;
    case Regularizer::kActivityL2:
      for (const Matrix& a : pass.activations) penalty += w * inv_batch * a.squaredNorm();
      break;
  }
  result.loss = result.cross_entropy + penalty;
  if (!std::isfinite(result.loss)) throw NumericalError("non-finite training loss");
  if (grads == nullptr) return result;

  *grads = zeros_like(net);
  Matrix delta = pass.probs;  // d loss / d logits
  for (Eigen::Index r = 0; r < rows; ++r) delta(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
  delta *= inv_batch;

  // Input to the heads: last hidden output after dropout.
  Matrix top_input = layers == 0 ? batch : pass.activations.back();
  if (layers > 0 && !pass.masks.empty()) top_input = top_input.cwiseProduct(pass.masks.back());

  Matrix upstream = Matrix::Zero(rows, top_input.cols());
  for (std::size_t h = 0; h < arch.heads; ++h) {
    const std::size_t at = net.head_index(h);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (head_of(heads, r) != static_cast<int>(h)) continue;
      grads->params[at].noalias() += top_input.row(r).transpose() * delta.row(r);
      grads->params[at + 1] += delta.row(r);
      upstream.row(r).noalias() += delta.row(r) * net.params[at].transpose();
    }
  }

  for (std::size_t step = layers; step-- > 0;) {
    const Matrix& z = pass.pre[step];
    const Matrix& a = pass.activations[step];
    Matrix d_act = pass.masks.empty() ? upstream : upstream.cwiseProduct(pass.masks[step]);
    if (arch.regularizer == Regularizer::kActivityL1) {
      d_act += (w * inv_batch) * a.unaryExpr([](double v) { return sign(v); });
    } else if (arch.regularizer == Regularizer::kActivityL2) {
      d_act += (2.0 * w * inv_batch) * a;
    }
    const Matrix d_pre = d_act.cwiseProduct(z.unaryExpr([&](double v) { return activation_slope(v, arch); }));

    Matrix input;
    if (step == 0) {
      input = batch;
    } else {
      input = pass.activations[step - 1];
      if (!pass.masks.empty()) input = input.cwiseProduct(pass.masks[step - 1]);
    }
    Matrix& gw = grads->params[2 * step];
    gw.noalias() = input.transpose() * d_pre;
    if (arch.regularizer == Regularizer::kKernelL1) {
      gw += w * net.params[2 * step].unaryExpr([](double v) { return sign(v); });
    } else if (arch.regularizer == Regularizer::kKernelL2) {
      gw += (2.0 * w) * net.params[2 * step];
    }
    grads->params[2 * step + 1] = d_pre.colwise().sum();
    if (step > 0) upstream.noalias() = d_pre * net.params[2 * step].transpose();
  }
  return result;
}

Matrix hidden_activations(const Network& net, const Matrix& probe) {
  const ForwardPass pass = forward(net, probe, {}, false, 0);
  Matrix out(static_cast<Eigen::Index>(net.arch.hidden_units()), probe.rows());
  Eigen::Index at = 0;
  for (const Matrix& a : pass.activations) {
    out.middleRows(at, a.cols()) = a.transpose();
    at += a.cols();
  }
  return out;
}

}  // namespace mphate
