#include "mphate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

namespace {

void check_alignment(const Embedding& embedding, const TimeTrace& trace) {
  if (embedding.n_epochs != trace.n_epochs() || embedding.n_units != trace.n_units() ||
      static_cast<std::size_t>(embedding.coords.rows()) != trace.n_points()) {
    throw ConsistencyError("embedding grid " + std::to_string(embedding.n_epochs) + "x" +
                           std::to_string(embedding.n_units) + " does not match trace " +
                           std::to_string(trace.n_epochs()) + "x" + std::to_string(trace.n_units()));
  }
}

double overlap(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(a.size());
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    // ranks start..end-1 (1-based start+1..end) share their mean
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t r = start; r < end; ++r) ranks[order[r]] = rank;
    start = end;
  }
  return ranks;
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(const Eigen::Ref<const Matrix>& points, std::size_t query,
                                           std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (query >= n) throw ValidationError("nearest_neighbors: query out of range");
  if (k >= n) {
    throw ValidationError("k=" + std::to_string(k) + " neighbors need more than " + std::to_string(n) +
                          " points");
  }
  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(n - 1);
  const auto q = static_cast<Eigen::Index>(query);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == query) continue;
    candidates.emplace_back((points.row(static_cast<Eigen::Index>(j)) - points.row(q)).norm(), j);
  }
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());
  std::vector<std::size_t> result(k);
  for (std::size_t r = 0; r < k; ++r) result[r] = candidates[r].second;
  return result;
}

PreservationScores intraslice_preservation(const Embedding& embedding, const TimeTrace& trace,
                                           std::size_t k) {
  check_alignment(embedding, trace);
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  if (k < 1 || k >= m) {
    throw ValidationError("intraslice preservation needs 1 <= k < m, got k=" + std::to_string(k) +
                          ", m=" + std::to_string(m));
  }
  PreservationScores scores{k, std::vector<double>(n * m, 0.0), 0.0};
  parallel_for(n, [&](std::size_t t) {
    const Matrix features = trace.slice(t);
    const Matrix coords = embedding.coords.middleRows(static_cast<Eigen::Index>(t * m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      scores.per_point[t * m + i] = overlap(nearest_neighbors(coords, i, k), nearest_neighbors(features, i, k));
    }
  });
  scores.mean = mean_of(scores.per_point);
  return scores;
}

PreservationScores interslice_preservation(const Embedding& embedding, const TimeTrace& trace,
                                           std::size_t k) {
  check_alignment(embedding, trace);
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  if (k < 1 || k >= n) {
    throw ValidationError("interslice preservation needs 1 <= k < n, got k=" + std::to_string(k) +
                          ", n=" + std::to_string(n));
  }
  PreservationScores scores{k, std::vector<double>(n * m, 0.0), 0.0};
  parallel_for(m, [&](std::size_t i) {
    const Matrix features = trace.trajectory(i);
    Matrix coords(static_cast<Eigen::Index>(n), embedding.coords.cols());
    for (std::size_t t = 0; t < n; ++t) {
      coords.row(static_cast<Eigen::Index>(t)) = embedding.coords.row(static_cast<Eigen::Index>(t * m + i));
    }
    for (std::size_t t = 0; t < n; ++t) {
      scores.per_point[t * m + i] = overlap(nearest_neighbors(coords, t, k), nearest_neighbors(features, t, k));
    }
  });
  scores.mean = mean_of(scores.per_point);
  return scores;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: sequences differ in length");
  if (x.size() < 3) throw ValidationError("spearman: need at least 3 observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValidationError("spearman: non-finite input");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("spearman: constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double loss_correlation(const Embedding& embedding, std::span<const double> losses) {
  const std::size_t n = embedding.n_epochs;
  const std::size_t m = embedding.n_units;
  if (losses.size() != n) {
    throw ConsistencyError("loss_correlation: " + std::to_string(losses.size()) + " losses for " +
                           std::to_string(n) + " epochs");
  }
  if (n < 4) throw ValidationError("loss_correlation: need at least 4 epochs for 3 rate samples");
  std::vector<double> unit_rate(n - 1, 0.0);
  std::vector<double> loss_rate(n - 1, 0.0);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      total += (embedding.coords.row(static_cast<Eigen::Index>((t + 1) * m + i)) -
                embedding.coords.row(static_cast<Eigen::Index>(t * m + i)))
                   .norm();
    }
    unit_rate[t] = total / static_cast<double>(m);
    loss_rate[t] = std::abs(losses[t + 1] - losses[t]);
  }
  return spearman(unit_rate, loss_rate);
}

double ari(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("ari: labelings differ in length");
  const std::size_t n = a.size();
  auto pairs = [](double count) { return 0.5 * count * (count - 1.0); };

  std::vector<int> la(a.begin(), a.end());
  std::vector<int> lb(b.begin(), b.end());
  std::sort(la.begin(), la.end());
  la.erase(std::unique(la.begin(), la.end()), la.end());
  std::sort(lb.begin(), lb.end());
  lb.erase(std::unique(lb.begin(), lb.end()), lb.end());
  auto index_of = [](const std::vector<int>& labels, int value) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), value) - labels.begin());
  };

  std::vector<double> table(la.size() * lb.size(), 0.0);
  std::vector<double> rows(la.size(), 0.0);
  std::vector<double> cols(lb.size(), 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t r = index_of(la, a[s]);
    const std::size_t c = index_of(lb, b[s]);
    table[r * lb.size() + c] += 1.0;
    rows[r] += 1.0;
    cols[c] += 1.0;
  }
  double index = 0.0;
  for (double v : table) index += pairs(v);
  double sum_a = 0.0;
  for (double v : rows) sum_a += pairs(v);
  double sum_b = 0.0;
  for (double v : cols) sum_b += pairs(v);
  const double total = pairs(static_cast<double>(n));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

SwitchAriReport task_switch_ari(const Embedding& embedding, const std::vector<std::size_t>& switches,
                                std::size_t window, std::size_t k_min, std::size_t k_max,
                                std::size_t seeds) {
  const std::size_t n = embedding.n_epochs;
  const std::size_t m = embedding.n_units;
  if (switches.empty()) throw ValidationError("task_switch_ari: no task switches");
  if (window < 1 || seeds < 1 || k_min < 1 || k_min > k_max) {
    throw ValidationError("task_switch_ari: need window >= 1, seeds >= 1, 1 <= k_min <= k_max");
  }
  if (k_max > m) throw ValidationError("task_switch_ari: more clusters than units");
  for (std::size_t s : switches) {
    if (s < 1 || s + window - 1 >= n) {
      throw ValidationError("task_switch_ari: switch at slice " + std::to_string(s) + " lacks " +
                            std::to_string(window) + " slices on both sides");
    }
  }

  SwitchAriReport report;
  report.switches = switches;
  report.window = window;
  report.k_min = k_min;
  report.k_max = k_max;
  report.seeds = seeds;
  const std::size_t n_k = k_max - k_min + 1;
  report.values.assign(switches.size() * n_k * seeds, 0.0);

  auto slice_of = [&](std::size_t t) {
    return Matrix(embedding.coords.middleRows(static_cast<Eigen::Index>(t * m), static_cast<Eigen::Index>(m)));
  };
  parallel_for(report.values.size(), [&](std::size_t job) {
    const std::size_t seed = job % seeds;
    const std::size_t k = k_min + (job / seeds) % n_k;
    const std::size_t s = switches[job / (seeds * n_k)];
    const auto before = kmeans(slice_of(s - 1), k, seed).labels;
    const auto after = kmeans(slice_of(s + window - 1), k, seed).labels;
    report.values[job] = ari(before, after);
  });
  report.mean = mean_of(report.values);
  return report;
}

double per_slice_variance(const Embedding& embedding) {
  const std::size_t n = embedding.n_epochs;
  const std::size_t m = embedding.n_units;
  if (m == 0) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    for (Eigen::Index c = 0; c < embedding.coords.cols(); ++c) {
      const auto column = embedding.coords.col(c).segment(static_cast<Eigen::Index>(t * m), static_cast<Eigen::Index>(m));
      const double mean = column.mean();
      total += (column.array() - mean).square().sum() / static_cast<double>(m);
    }
  }
  return total;
}

MetricsReport compute_metrics(const Embedding& embedding, const TimeTrace& trace, const TraceMetadata& meta) {
  check_alignment(embedding, trace);
  const TimeTrace z = trace.zscored() ? trace : zscore(trace);
  MetricsReport report;
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  if (10 < m) report.intraslice_k10 = intraslice_preservation(embedding, z, 10).mean;
  if (40 < m) report.intraslice_k40 = intraslice_preservation(embedding, z, 40).mean;
  if (10 < n) report.interslice_k10 = interslice_preservation(embedding, z, 10).mean;
  if (40 < n) report.interslice_k40 = interslice_preservation(embedding, z, 40).mean;

  if (trace.epoch_losses() && n >= 4) {
    std::vector<double> losses;
    for (const EpochRecord& r : *trace.epoch_losses()) losses.push_back(r.val_loss);
    try {
      report.loss_correlation = loss_correlation(embedding, losses);
    } catch (const UndefinedCorrelationError&) {
    }
  }
  if (!meta.task_switches.empty() && m >= 8) {
    bool fits = true;
    for (std::size_t s : meta.task_switches) fits = fits && s >= 1 && s + 1 < n;
    if (fits) report.switch_ari = task_switch_ari(embedding, meta.task_switches).mean;
  }
  report.per_slice_variance = per_slice_variance(embedding);
  return report;
}

}  // namespace mphate
