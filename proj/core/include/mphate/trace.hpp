#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mphate/linalg.hpp"

namespace mphate {

/// Loss/accuracy bookkeeping for one recorded slice.
struct EpochRecord {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Hidden-unit activations over training: an (epoch, unit, sample) tensor.
///
/// Storage is epoch-major, then unit, then sample, so the activations of unit
/// i at epoch t are the contiguous row `row(t, i)`. Instances are immutable;
/// transformations return new traces.
class TimeTrace {
 public:
  TimeTrace() = default;

  /// Checks shape consistency and finiteness. The stronger "every axis >= 2"
  /// and z-score invariants are checked by validate().
  TimeTrace(std::size_t n_epochs, std::size_t n_units, std::size_t n_samples,
            std::vector<double> data, std::vector<int> unit_layer,
            std::optional<std::vector<EpochRecord>> epoch_losses = std::nullopt,
            std::optional<std::vector<int>> sample_labels = std::nullopt, bool zscored = false);

  std::size_t n_epochs() const noexcept { return n_epochs_; }
  std::size_t n_units() const noexcept { return n_units_; }
  std::size_t n_samples() const noexcept { return n_samples_; }
  /// Number of (epoch, unit) points, n_epochs * n_units.
  std::size_t n_points() const noexcept { return n_epochs_ * n_units_; }
  bool zscored() const noexcept { return zscored_; }

  double at(std::size_t epoch, std::size_t unit, std::size_t sample) const {
    return data_[(epoch * n_units_ + unit) * n_samples_ + sample];
  }
  std::span<const double> row(std::size_t epoch, std::size_t unit) const {
    return {data_.data() + (epoch * n_units_ + unit) * n_samples_, n_samples_};
  }
  std::span<const double> data() const noexcept { return data_; }

  /// m x p matrix of all units at one epoch.
  Matrix slice(std::size_t epoch) const;
  /// n x p matrix of one unit across all epochs.
  Matrix trajectory(std::size_t unit) const;
  /// (n*m) x p matrix, row tau*m + i holds unit i at epoch tau.
  Matrix points() const;

  const std::vector<int>& unit_layer() const noexcept { return unit_layer_; }
  const std::optional<std::vector<EpochRecord>>& epoch_losses() const noexcept {
    return epoch_losses_;
  }
  const std::optional<std::vector<int>>& sample_labels() const noexcept { return sample_labels_; }

  /// Enforces n, m, p >= 2, finite data, and the z-score invariant when flagged.
  void validate() const;

  friend bool operator==(const TimeTrace&, const TimeTrace&) = default;

 private:
  std::size_t n_epochs_ = 0;
  std::size_t n_units_ = 0;
  std::size_t n_samples_ = 0;
  std::vector<double> data_;
  std::vector<int> unit_layer_;
  std::optional<std::vector<EpochRecord>> epoch_losses_;
  std::optional<std::vector<int>> sample_labels_;
  bool zscored_ = false;
};

/// Run-level annotations that travel with a trace.
struct TraceMetadata {
  /// First unit index of each layer, plus a final entry equal to n_units.
  std::vector<std::size_t> layer_boundaries;
  std::string optimizer;
  /// Slice indices at which a new task starts. Strictly increasing.
  std::vector<std::size_t> task_switches;
  /// Units removed by drop_dead_units(), as indices into the original trace.
  std::vector<std::size_t> dropped_units;
  std::map<std::string, std::string> annotations;

  void validate(std::size_t n_epochs) const;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

/// Layer boundaries implied by a per-unit layer vector.
std::vector<std::size_t> layer_boundaries_of(const std::vector<int>& unit_layer);

/// Population variance below this is a degenerate unit.
inline constexpr double kDegenerateVariance = 1e-12;

/// Replaces every (epoch, unit) row by its z-score over samples (population
/// variance). Throws DegenerateUnitError naming the first zero-variance row.
TimeTrace zscore(const TimeTrace& trace);

/// Removes every unit whose activations are degenerate at any epoch.
/// Returns the reduced trace and the removed unit indices.
std::pair<TimeTrace, std::vector<std::size_t>> drop_dead_units(const TimeTrace& trace);

/// Class whose probe samples activate `unit` most on average at the final epoch.
/// Ties go to the smallest label. Requires sample labels.
int most_active_label(const TimeTrace& trace, std::size_t unit);

// ---------------------------------------------------------------------------
// Binary trace file ("MPHT", version 1, little-endian).

inline constexpr char kTraceMagic[4] = {'M', 'P', 'H', 'T'};
inline constexpr std::uint32_t kTraceVersion = 1;

/// Serializes a validated trace. Nothing is written if validation fails.
void write_trace(std::ostream& sink, const TimeTrace& trace, const TraceMetadata& meta);
std::pair<TimeTrace, TraceMetadata> read_trace(std::istream& source);

void write_trace_file(const std::string& path, const TimeTrace& trace, const TraceMetadata& meta);
std::pair<TimeTrace, TraceMetadata> read_trace_file(const std::string& path);

/// Writes a bare (1, rows, cols) tensor in the trace container, used to dump
/// square operators. No trace invariants are imposed.
void write_matrix(std::ostream& sink, const Matrix& matrix, const std::string& content);

}  // namespace mphate
