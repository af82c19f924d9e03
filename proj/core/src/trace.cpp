#include "mphate/trace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

namespace {

struct RowMoments {
  double mean;
  double variance;
};

RowMoments moments(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) sum += v;
  const double mean = sum / static_cast<double>(row.size());
  double squares = 0.0;
  for (double v : row) squares += (v - mean) * (v - mean);
  return {mean, squares / static_cast<double>(row.size())};
}

}  // namespace

TimeTrace::TimeTrace(std::size_t n_epochs, std::size_t n_units, std::size_t n_samples,
                     std::vector<double> data, std::vector<int> unit_layer,
                     std::optional<std::vector<EpochRecord>> epoch_losses,
                     std::optional<std::vector<int>> sample_labels, bool zscored)
    : n_epochs_(n_epochs),
      n_units_(n_units),
      n_samples_(n_samples),
      data_(std::move(data)),
      unit_layer_(std::move(unit_layer)),
      epoch_losses_(std::move(epoch_losses)),
      sample_labels_(std::move(sample_labels)),
      zscored_(zscored) {
  if (data_.size() != n_epochs_ * n_units_ * n_samples_) {
    throw ConsistencyError("trace data holds " + std::to_string(data_.size()) +
                           " values, expected " +
                           std::to_string(n_epochs_ * n_units_ * n_samples_));
  }
  if (unit_layer_.size() != n_units_) {
    throw ConsistencyError("unit_layer has " + std::to_string(unit_layer_.size()) +
                           " entries for " + std::to_string(n_units_) + " units");
  }
  if (epoch_losses_ && epoch_losses_->size() != n_epochs_) {
    throw ConsistencyError("epoch_losses has " + std::to_string(epoch_losses_->size()) +
                           " records for " + std::to_string(n_epochs_) + " epochs");
  }
  if (sample_labels_ && sample_labels_->size() != n_samples_) {
    throw ConsistencyError("sample_labels has " + std::to_string(sample_labels_->size()) +
                           " entries for " + std::to_string(n_samples_) + " samples");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ValidationError("trace data contains a non-finite value");
  }
}

Matrix TimeTrace::slice(std::size_t epoch) const {
  Matrix out(static_cast<Eigen::Index>(n_units_), static_cast<Eigen::Index>(n_samples_));
  for (std::size_t i = 0; i < n_units_; ++i) {
    const auto r = row(epoch, i);
    for (std::size_t k = 0; k < n_samples_; ++k)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k];
  }
  return out;
}

Matrix TimeTrace::trajectory(std::size_t unit) const {
  Matrix out(static_cast<Eigen::Index>(n_epochs_), static_cast<Eigen::Index>(n_samples_));
  for (std::size_t t = 0; t < n_epochs_; ++t) {
    const auto r = row(t, unit);
    for (std::size_t k = 0; k < n_samples_; ++k)
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = r[k];
  }
  return out;
}

Matrix TimeTrace::points() const {
  const std::size_t rows = n_points();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n_samples_));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < n_samples_; ++k)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = data_[r * n_samples_ + k];
  return out;
}

void TimeTrace::validate() const {
  if (n_epochs_ < 2 || n_units_ < 2 || n_samples_ < 2) {
    throw ValidationError("trace dimensions must all be >= 2, got (" + std::to_string(n_epochs_) +
                          ", " + std::to_string(n_units_) + ", " + std::to_string(n_samples_) +
                          ")");
  }
  if (epoch_losses_) {
    for (const auto& rec : *epoch_losses_) {
      if (!(rec.train_loss >= 0.0 && rec.train_acc >= 0.0 && rec.val_loss >= 0.0 &&
            rec.val_acc >= 0.0)) {
        throw ValidationError("epoch loss records must be nonnegative");
      }
    }
  }
  if (!zscored_) return;
  for (std::size_t t = 0; t < n_epochs_; ++t) {
    for (std::size_t i = 0; i < n_units_; ++i) {
      const auto m = moments(row(t, i));
      if (std::abs(m.mean) > 1e-6 || std::abs(m.variance - 1.0) > 1e-4) {
        throw ValidationError("trace flagged z-scored but row (" + std::to_string(t) + ", " +
                              std::to_string(i) + ") is not standardized");
      }
    }
  }
}

void TraceMetadata::validate(std::size_t n_epochs) const {
  for (std::size_t s = 0; s < task_switches.size(); ++s) {
    if (task_switches[s] >= n_epochs) {
      throw ValidationError("task switch " + std::to_string(task_switches[s]) +
                            " is out of range for " + std::to_string(n_epochs) + " slices");
    }
    if (s > 0 && task_switches[s] <= task_switches[s - 1]) {
      throw ValidationError("task switches must be strictly increasing");
    }
  }
}

std::vector<std::size_t> layer_boundaries_of(const std::vector<int>& unit_layer) {
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < unit_layer.size(); ++i) {
    if (i == 0 || unit_layer[i] != unit_layer[i - 1]) bounds.push_back(i);
  }
  bounds.push_back(unit_layer.size());
  return bounds;
}

TimeTrace zscore(const TimeTrace& trace) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  const std::size_t p = trace.n_samples();
  if (p == 0) throw ValidationError("zscore: trace has no samples");

  std::vector<double> out(trace.data().size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = trace.row(t, i);
      const auto mom = moments(r);
      if (mom.variance < kDegenerateVariance) throw DegenerateUnitError(t, i);
      const double inv_std = 1.0 / std::sqrt(mom.variance);
      double* dst = out.data() + (t * m + i) * p;
      for (std::size_t k = 0; k < p; ++k) dst[k] = (r[k] - mom.mean) * inv_std;
    }
  }
  return TimeTrace(n, m, p, std::move(out), trace.unit_layer(), trace.epoch_losses(),
                   trace.sample_labels(), true);
}

std::pair<TimeTrace, std::vector<std::size_t>> drop_dead_units(const TimeTrace& trace) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  const std::size_t p = trace.n_samples();

  std::vector<std::size_t> dead;
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < m; ++i) {
    bool is_dead = false;
    for (std::size_t t = 0; t < n && !is_dead; ++t) {
      is_dead = moments(trace.row(t, i)).variance < kDegenerateVariance;
    }
    (is_dead ? dead : alive).push_back(i);
  }

  std::vector<double> data;
  data.reserve(n * alive.size() * p);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i : alive) {
      const auto r = trace.row(t, i);
      data.insert(data.end(), r.begin(), r.end());
    }
  }
  std::vector<int> layers;
  for (std::size_t i : alive) layers.push_back(trace.unit_layer()[i]);
  TimeTrace reduced(n, alive.size(), p, std::move(data), std::move(layers), trace.epoch_losses(),
                    trace.sample_labels(), trace.zscored());
  return {std::move(reduced), std::move(dead)};
}

int most_active_label(const TimeTrace& trace, std::size_t unit) {
  if (!trace.sample_labels()) throw ValidationError("most_active_label: trace has no sample labels");
  if (unit >= trace.n_units()) throw ValidationError("most_active_label: unit out of range");
  if (trace.n_epochs() == 0) throw ValidationError("most_active_label: trace has no epochs");

  const auto& labels = *trace.sample_labels();
  const auto r = trace.row(trace.n_epochs() - 1, unit);
  std::map<int, std::pair<double, std::size_t>> sums;  // label -> (sum, count), label-ordered
  for (std::size_t k = 0; k < r.size(); ++k) {
    auto& acc = sums[labels[k]];
    acc.first += r[k];
    acc.second += 1;
  }

  int best_label = 0;
  double best_mean = 0.0;
  bool first = true;
  for (const auto& [label, acc] : sums) {
    const double mean = acc.first / static_cast<double>(acc.second);
    // Means that differ only by summation rounding count as ties.
    const double tolerance = 1e-12 * std::max(1.0, std::abs(best_mean));
    if (first || mean > best_mean + tolerance) {
      best_label = label;
      best_mean = mean;
      first = false;
    }
  }
  return best_label;
}

}  // namespace mphate
