#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mphate/dataset.hpp"
#include "mphate/mlp.hpp"
#include "mphate/optimizer.hpp"
#include "mphate/trace.hpp"

namespace mphate {

enum class LabelMode { kTrue, kRandomLabels, kRandomPixels };

std::string to_string(LabelMode mode);

/// Single-task training run.
struct TrainConfig {
  /// inputs/outputs are filled from the data when left at 0.
  Architecture arch;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-5;
  std::size_t batch_size = 256;
  std::size_t epochs = 300;
  /// Corruption applied to the training split only.
  LabelMode label_mode = LabelMode::kTrue;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Outcome of a training run besides its trace.
struct TrainRun {
  /// One record per trace slice.
  std::vector<EpochRecord> curves;
  /// Final validation loss minus final training loss.
  double memorization_error = 0.0;
  /// Threads used by the training loop (always 1: it is sequential).
  std::size_t threads = 1;
  Network network;
};

/// Mini-batch training with per-epoch shuffling. After every epoch the probe
/// activations of all hidden units become one trace slice, and the running
/// training loss/accuracy plus validation loss/accuracy are recorded.
/// Throws NumericalError naming the epoch on divergence.
std::pair<TrainRun, TimeTrace> train(const TrainConfig& config, const Dataset& training,
                                     const Dataset& validation, const Dataset& probe);

/// Loss and accuracy of a dataset in eval mode (penalty included).
LossResult evaluate(const Network& net, const Dataset& data, std::span<const int> heads = {});

// ---------------------------------------------------------------------------
// Continual learning

enum class Scenario { kTask, kDomain, kClass };

std::string to_string(Scenario scenario);
Scenario parse_scenario(const std::string& name);

struct ContinualConfig {
  Scenario scenario = Scenario::kTask;
  std::size_t n_tasks = 5;
  std::size_t epochs_per_task = 4;
  std::vector<std::size_t> hidden = {400, 400};
  Activation activation = Activation::kRelu;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-5;
  /// Batch size without rehearsal.
  std::size_t batch_size = 128;
  bool rehearsal = false;
  /// Examples retained per completed task (reservoir sampling).
  std::size_t buffer_per_task = 200;
  /// With rehearsal, batches hold this many new examples plus as many replayed ones.
  std::size_t rehearsal_half_batch = 64;
  std::size_t slice_interval = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ContinualRun {
  TrainRun run;
  TimeTrace trace;
  /// Slice index at which each task after the first starts.
  std::vector<std::size_t> task_switches;
  /// Network snapshot at the end of every task.
  std::vector<Network> task_end_networks;
  /// Final validation loss per task.
  std::vector<double> task_val_loss;
  std::vector<double> task_val_acc;
};

/// Sequential training over binary tasks with head wiring by scenario:
/// task uses one 2-unit head per task, domain one shared 2-unit head, class
/// one 2*n_tasks-unit head with global labels. Validation is the union of the
/// per-task validation sets (callers pass equally sized ones).
ContinualRun continual_train(const ContinualConfig& config, const std::vector<Dataset>& tasks,
                             const std::vector<Dataset>& validation, const Dataset& probe);

}  // namespace mphate
