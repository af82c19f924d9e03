#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mphate/embed.hpp"
#include "mphate/linalg.hpp"
#include "mphate/trace.hpp"

namespace mphate {

/// Per-point neighborhood preservation for one k.
struct PreservationScores {
  std::size_t k = 0;
  /// Indexed by flat point index epoch * m + unit; every value in [0, 1].
  std::vector<double> per_point;
  double mean = 0.0;
};

/// Indices of the k nearest rows to `query` (self excluded), ordered by
/// distance then by smaller index.
std::vector<std::size_t> nearest_neighbors(const Eigen::Ref<const Matrix>& points, std::size_t query,
                                           std::size_t k);

/// Overlap of k-NN sets among units of the same epoch, embedding vs trace.
PreservationScores intraslice_preservation(const Embedding& embedding, const TimeTrace& trace,
                                           std::size_t k);

/// Overlap of k-NN sets among epochs of the same unit, embedding vs trace.
PreservationScores interslice_preservation(const Embedding& embedding, const TimeTrace& trace,
                                           std::size_t k);

/// Pearson correlation of average ranks. Throws UndefinedCorrelationError on a
/// constant input.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman correlation between the mean per-unit step length of the embedding
/// and |delta loss|, over consecutive epochs.
double loss_correlation(const Embedding& embedding, std::span<const double> losses);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding drawn from mt19937_64(seed).
/// An emptied cluster is re-seeded at the point farthest from its center.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 300, double tol = 1e-6);

/// Pair-counting adjusted Rand index. When the expected index equals the
/// maximum (both partitions all-singletons or both a single block) the
/// partitions coincide and 1 is returned.
double ari(std::span<const int> a, std::span<const int> b);

struct SwitchAriReport {
  std::vector<std::size_t> switches;
  std::size_t window = 2;
  std::size_t k_min = 3;
  std::size_t k_max = 8;
  std::size_t seeds = 20;
  /// values[(s * n_k + (k - k_min)) * seeds + seed]
  std::vector<double> values;
  double mean = 0.0;
};

/// For every switch s: cluster the unit positions at slice s-1 and at slice
/// s+window-1 with the same k and seed, then compare the labelings by ARI.
SwitchAriReport task_switch_ari(const Embedding& embedding, const std::vector<std::size_t>& switches,
                                std::size_t window = 2, std::size_t k_min = 3, std::size_t k_max = 8,
                                std::size_t seeds = 20);

/// Sum over slices and coordinates of the population variance across units.
double per_slice_variance(const Embedding& embedding);

/// All metrics of one embedding; unset entries could not be computed.
struct MetricsReport {
  std::optional<double> intraslice_k10;
  std::optional<double> intraslice_k40;
  std::optional<double> interslice_k10;
  std::optional<double> interslice_k40;
  std::optional<double> loss_correlation;
  std::optional<double> switch_ari;
  double per_slice_variance = 0.0;
};

/// Preservation is measured against the z-scored trace (the space the kernel sees).
MetricsReport compute_metrics(const Embedding& embedding, const TimeTrace& trace,
                              const TraceMetadata& meta);

}  // namespace mphate
