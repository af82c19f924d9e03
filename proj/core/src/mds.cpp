#include <cmath>
#include <string>
#include <vector>

#include "mphate/embed.hpp"
#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

namespace {

void check_distance_matrix(const Matrix& distances) {
  if (distances.rows() != distances.cols()) throw ValidationError("distance matrix must be square");
  if (!distances.allFinite()) throw ValidationError("distance matrix has non-finite entries");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < distances.cols(); ++j) {
    if (distances(j, j) != 0.0) throw ValidationError("distance matrix diagonal must be zero");
    for (Eigen::Index i = 0; i < distances.rows(); ++i) {
      if (distances(i, j) < 0.0) throw ValidationError("distances must be nonnegative");
      if (std::abs(distances(i, j) - distances(j, i)) > 1e-9 * scale) {
        throw ValidationError("distance matrix must be symmetric");
      }
    }
  }
}

}  // namespace

ClassicalMdsResult classical_mds(const Matrix& distances, std::size_t dim) {
  check_distance_matrix(distances);
  const auto n = distances.rows();
  if (dim == 0 || static_cast<Eigen::Index>(dim) > n) {
    throw ValidationError("classical_mds: cannot embed " + std::to_string(n) + " points in " +
                          std::to_string(dim) + " dimensions");
  }

  const Matrix squared = (0.5 * (distances + distances.transpose())).array().square().matrix();
  const Vector row_mean = squared.rowwise().mean();
  const Vector col_mean = squared.colwise().mean().transpose();
  const double grand_mean = squared.mean();
  Matrix centered(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      centered(i, j) = -0.5 * (squared(i, j) - row_mean(i) - col_mean(j) + grand_mean);
  centered = (0.5 * (centered + centered.transpose())).eval();

  const SymmetricEigen top = top_symmetric_eigen(centered, dim);
  const double scale = centered.diagonal().cwiseAbs().sum();
  ClassicalMdsResult result;
  result.coords = Matrix::Zero(n, static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(dim); ++c) {
    const double value = top.values(c);
    if (value > 1e-12 * scale && value > 0.0) {
      result.coords.col(c) = std::sqrt(value) * top.vectors.col(c);
      ++result.positive_eigenvalues;
    }
  }
  fix_column_signs(result.coords);
  return result;
}

double raw_stress(const Matrix& distances, const Matrix& coords) {
  const auto n = coords.rows();
  double stress = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (coords.row(i) - coords.row(j)).norm();
      const double r = d - distances(i, j);
      stress += r * r;
    }
  }
  return stress;
}

namespace {

/// One pass over all pairs: stress of `current` and its Guttman transform.
double guttman_pass(const Matrix& distances, const RowMatrix& current, RowMatrix& next) {
  const auto n = current.rows();
  const auto dim = current.cols();
  std::vector<double> row_stress(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    const double* xi = current.data() + i * dim;
    double* out = next.data() + i * dim;
    for (Eigen::Index c = 0; c < dim; ++c) out[c] = 0.0;
    double stress = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* xj = current.data() + j * dim;
      double sq = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) sq += (xi[c] - xj[c]) * (xi[c] - xj[c]);
      const double d = std::sqrt(sq);
      const double target = distances(j, i);
      if (j > i) stress += (d - target) * (d - target);
      if (d > 0.0) {
        const double w = target / d;
        for (Eigen::Index c = 0; c < dim; ++c) out[c] += w * (xi[c] - xj[c]);
      }
    }
    for (Eigen::Index c = 0; c < dim; ++c) out[c] /= static_cast<double>(n);
    row_stress[ui] = stress;
  });
  double total = 0.0;
  for (double s : row_stress) total += s;
  return total;
}

}  // namespace

SmacofResult smacof_mds(const Matrix& distances, const Matrix& init, std::size_t max_iter,
                        double tol) {
  check_distance_matrix(distances);
  if (init.rows() != distances.rows() || init.cols() < 1) {
    throw ValidationError("smacof_mds: init must be N x dim with N=" +
                          std::to_string(distances.rows()));
  }
  const auto n = init.rows();
  double target_scale = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) target_scale += distances(i, j) * distances(i, j);

  RowMatrix current = init;
  RowMatrix next(n, init.cols());
  RowMatrix after(n, init.cols());
  SmacofResult result;

  double stress = guttman_pass(distances, current, next);
  if (!std::isfinite(stress)) throw NumericalError("smacof_mds: non-finite stress");
  result.stress_history.push_back(stress);

  for (std::size_t it = 0; it < max_iter; ++it) {
    // `next` is the Guttman transform of `current`; its stress comes with the
    // transform of `next` in the same pass.
    const double next_stress = guttman_pass(distances, next, after);
    if (!std::isfinite(next_stress)) throw NumericalError("smacof_mds: non-finite stress");
    ++result.iterations;
    if (next_stress > stress) break;  // rounding-level rise near the optimum

    current.swap(next);
    next.swap(after);
    const double previous = stress;
    stress = next_stress;
    result.stress_history.push_back(stress);
    if (previous <= 0.0 || stress <= 1e-20 * target_scale) break;
    if ((previous - stress) / previous < tol) break;
  }
  result.coords = current;
  return result;
}

}  // namespace mphate
