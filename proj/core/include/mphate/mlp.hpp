#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mphate/linalg.hpp"

namespace mphate {

enum class Activation { kRelu, kLeakyRelu };
enum class Regularizer { kNone, kKernelL1, kKernelL2, kActivityL1, kActivityL2 };

std::string to_string(Activation activation);
std::string to_string(Regularizer regularizer);
Regularizer parse_regularizer(const std::string& name);

/// Fully connected network shape and per-forward behaviour.
struct Architecture {
  std::size_t inputs = 0;
  std::vector<std::size_t> hidden;
  /// Units per output head.
  std::size_t outputs = 0;
  /// Independent output heads sharing the hidden stack.
  std::size_t heads = 1;
  Activation activation = Activation::kLeakyRelu;
  double leaky_slope = 0.1;
  /// Kernel penalties cover the hidden weight matrices; activity penalties the
  /// post-activation hidden outputs, averaged over the batch.
  Regularizer regularizer = Regularizer::kNone;
  double reg_weight = 1e-4;
  /// Dropout keep probability on hidden outputs, in (0, 1].
  double keep_prob = 1.0;

  void validate() const;
  std::size_t hidden_units() const;
};

/// Parameters as a flat tensor list: for hidden layer l, params[2l] is the
/// fan_in x fan_out weight and params[2l+1] the 1 x fan_out bias; heads follow
/// in the same pattern.
struct Network {
  Architecture arch;
  std::vector<Matrix> params;

  std::size_t layer_count() const noexcept { return arch.hidden.size(); }
  std::size_t weight_index(std::size_t layer) const noexcept { return 2 * layer; }
  std::size_t head_index(std::size_t head) const noexcept { return 2 * (arch.hidden.size() + head); }
  std::size_t parameter_count() const;

  friend bool operator==(const Network& a, const Network& b) { return a.params == b.params; }
};

/// Glorot-uniform weights, zero biases.
Network init_network(const Architecture& arch, std::uint64_t seed);

/// Network with the same shapes and every entry zero.
Network zeros_like(const Network& net);

struct ForwardPass {
  /// Pre-activations and post-activation outputs per hidden layer (before dropout).
  std::vector<Matrix> pre;
  std::vector<Matrix> activations;
  /// Inverted dropout masks (0 or 1/keep); empty when dropout is off.
  std::vector<Matrix> masks;
  /// Logits and softmax probabilities; row r comes from head heads[r].
  Matrix logits;
  Matrix probs;
};

/// Forward pass of a batch (one row per sample). `heads` selects the output
/// head per row; an empty span means head 0 everywhere. Dropout is applied
/// only in train mode, with masks drawn from `dropout_seed`.
ForwardPass forward(const Network& net, const Matrix& batch, std::span<const int> heads, bool train,
                    std::uint64_t dropout_seed);

struct LossResult {
  double loss = 0.0;
  double cross_entropy = 0.0;
  double accuracy = 0.0;
};

/// Mean softmax cross-entropy plus the regularization penalty. When `grads`
/// is non-null it receives exact gradients for every tensor (zero for heads
/// unused by the batch). L1 subgradients at 0 are 0. Throws NumericalError on
/// a non-finite loss.
LossResult loss_and_grads(const Network& net, const Matrix& batch, std::span<const int> labels,
                          std::span<const int> heads, bool train, std::uint64_t dropout_seed,
                          Network* grads);

/// Hidden activations of every unit (all layers concatenated) on a probe
/// batch in eval mode, as a units x samples matrix.
Matrix hidden_activations(const Network& net, const Matrix& probe);

double leaky_relu(double x, double slope);

}  // namespace mphate
