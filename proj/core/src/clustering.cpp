#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/metrics.hpp"

namespace mphate {

namespace {

/// Uniform double in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double squared_distance(const Matrix& points, Eigen::Index row, const Matrix& centers, Eigen::Index center) {
  return (points.row(row) - centers.row(center)).squaredNorm();
}

Matrix plus_plus_centers(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const auto n = points.rows();
  Matrix centers(static_cast<Eigen::Index>(k), points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  Vector nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest(i) = squared_distance(points, i, centers, 0);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = unit_draw(rng) * total;
      double running = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        running += nearest(i);
        if (nearest(i) > 0.0 && running > target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // rounding left target beyond the last positive weight
        for (Eigen::Index i = n - 1; i >= 0 && pick < 0; --i)
          if (nearest(i) > 0.0) pick = i;
      }
    } else {
      // All remaining points coincide with a center: take the first unused one.
      for (Eigen::Index i = 0; i < n && pick < 0; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) pick = i;
    }
    centers.row(static_cast<Eigen::Index>(c)) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), squared_distance(points, i, centers, static_cast<Eigen::Index>(c)));
    }
  }
  return centers;
}

/// Nearest center per point, smallest center index on ties. Returns the inertia.
double assign(const Matrix& points, const Matrix& centers, std::vector<int>& labels, Vector& cost) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_cost = squared_distance(points, i, centers, 0);
    for (Eigen::Index c = 1; c < centers.rows(); ++c) {
      const double d = squared_distance(points, i, centers, c);
      if (d < best_cost) {
        best_cost = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    cost(i) = best_cost;
    inertia += best_cost;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol) {
  const auto n = points.rows();
  if (k < 1 || static_cast<Eigen::Index>(k) > n) {
    throw ValidationError("kmeans: k=" + std::to_string(k) + " clusters for " + std::to_string(n) + " points");
  }
  if (!points.allFinite()) throw ValidationError("kmeans: non-finite points");

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centers = plus_plus_centers(points, k, rng);
  result.labels.assign(static_cast<std::size_t>(n), 0);
  Vector cost(n);
  const auto kk = static_cast<Eigen::Index>(k);

  for (std::size_t it = 0; it < max_iter; ++it) {
    result.inertia_history.push_back(assign(points, result.centers, result.labels, cost));
    ++result.iterations;

    Matrix sums = Matrix::Zero(kk, points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(result.labels[static_cast<std::size_t>(i)]);
      sums.row(static_cast<Eigen::Index>(c)) += points.row(i);
      ++counts[c];
    }
    Matrix updated = result.centers;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        updated.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it to the worst-served point, which then costs 0.
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i)
        if (cost(i) > cost(far)) far = i;
      updated.row(static_cast<Eigen::Index>(c)) = points.row(far);
      cost(far) = 0.0;
    }
    const double movement = (updated - result.centers).rowwise().norm().maxCoeff();
    result.centers = std::move(updated);
    if (movement <= tol) break;
  }
  // Labels consistent with the final centers.
  const double final_inertia = assign(points, result.centers, result.labels, cost);
  if (final_inertia < result.inertia_history.back()) result.inertia_history.push_back(final_inertia);
  return result;
}

}  // namespace mphate
