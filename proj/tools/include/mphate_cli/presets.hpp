#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mphate/dataset.hpp"
#include "mphate/trace.hpp"
#include "mphate/train.hpp"

namespace mphate::cli {

enum class Scale { kDesk, kFull };

struct PresetOptions {
  std::uint64_t seed = 0;
  /// Continual presets: adam, adagrad or rehearsal.
  std::string optimizer = "adam";
  Scale scale = Scale::kDesk;
  /// Overrides the preset's epoch count (epochs per task for continual presets).
  std::optional<std::size_t> epochs;
  /// Overrides the preset's learning rate.
  std::optional<double> learning_rate;
  /// Optional IDX image/label files replacing the synthetic data.
  std::string idx_images;
  std::string idx_labels;
};

/// A trained run ready to be written.
struct PresetRun {
  TimeTrace trace;
  TraceMetadata meta;
  std::vector<EpochRecord> curves;
  /// Final validation minus training loss.
  double memorization_error = 0.0;
  /// Final validation loss (averaged over tasks for continual runs).
  double final_val_loss = 0.0;
};

/// generalization-{vanilla,dropout,kernel-l1,kernel-l2,activity-l1,activity-l2,random-labels,random-pixels}
const std::vector<std::string>& generalization_presets();
/// continual-{task,domain,class}
const std::vector<std::string>& continual_presets();
const std::vector<std::string>& continual_optimizers();

/// True for every accepted spelling, including continual-<scenario>-<optimizer>.
bool is_preset(const std::string& name);

/// Training configuration a generalization preset resolves to.
TrainConfig generalization_config(const std::string& name, const PresetOptions& options);
/// Training configuration a continual preset resolves to (optimizer from options).
ContinualConfig continual_config(const std::string& name, const PresetOptions& options);

/// Trains the preset and returns its trace with metadata annotations.
PresetRun run_preset(const std::string& name, const PresetOptions& options);

}  // namespace mphate::cli
