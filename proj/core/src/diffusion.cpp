#include "mphate/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mphate/error.hpp"

namespace mphate {

Spectrum spectral_decompose(const DiffusionOperator& op, std::size_t ell) {
  const std::size_t n = op.size();
  if (n == 0) throw ValidationError("spectral_decompose: empty operator");
  if (ell > n) {
    throw ValidationError("spectral_decompose: ell=" + std::to_string(ell) + " exceeds N=" +
                          std::to_string(n));
  }

  const Vector inv_sqrt_deg = op.degrees.cwiseSqrt().cwiseInverse();
  const Matrix conjugate =
      inv_sqrt_deg.asDiagonal() * op.symmetric_kernel * inv_sqrt_deg.asDiagonal();
  const SymmetricEigen eig = symmetric_eigen(conjugate, ell > 0);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double la = eig.values(a);
    const double lb = eig.values(b);
    if (std::abs(la) != std::abs(lb)) return std::abs(la) > std::abs(lb);
    return la > lb;
  });

  Spectrum spec;
  spec.eigenvalues.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) spec.eigenvalues(static_cast<Eigen::Index>(r)) = eig.values(order[r]);
  if (ell == 0) return spec;

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(ell);
  spec.conjugate_basis.resize(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) spec.conjugate_basis.col(c) = eig.vectors.col(order[static_cast<std::size_t>(c)]);
  fix_column_signs(spec.conjugate_basis);

  // psi = sqrt(vol) D^-1/2 v and phi = D^1/2 v / sqrt(vol), so psi_0 = 1 and phi_0 = pi.
  const double volume = op.degrees.sum();
  const double root_volume = std::sqrt(volume);
  spec.right = std::sqrt(volume) * (inv_sqrt_deg.asDiagonal() * spec.conjugate_basis);
  spec.left = (op.degrees.cwiseSqrt().asDiagonal() * spec.conjugate_basis) / root_volume;
  return spec;
}

double von_neumann_entropy(const Vector& eigenvalues, std::size_t t) {
  const auto n = eigenvalues.size();
  if (n == 0) return 0.0;
  // P^0 is the identity: every eigenvalue is 1, eta is uniform.
  if (t == 0) return std::log(static_cast<double>(n));

  Vector mass(n);
  for (Eigen::Index l = 0; l < n; ++l) mass(l) = std::pow(std::abs(eigenvalues(l)), static_cast<double>(t));
  const double total = mass.sum();
  if (!(total > 0.0)) return 0.0;
  double entropy = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    const double eta = mass(l) / total;
    if (eta < 1e-300) continue;
    entropy -= eta * std::log(eta);
  }
  return entropy;
}

std::size_t knee_index(std::span<const double> curve) {
  const std::size_t count = curve.size();
  if (count < 3) return 0;
  const double x0 = 1.0;
  const double y0 = curve.front();
  const double x1 = static_cast<double>(count);
  const double y1 = curve.back();
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double norm = std::hypot(dx, dy);

  std::vector<double> distance(count);
  double scale = 1.0;
  for (std::size_t s = 0; s < count; ++s) {
    const double x = static_cast<double>(s + 1);
    distance[s] = std::abs(dy * x - dx * curve[s] + x1 * y0 - y1 * x0) / norm;
    scale = std::max(scale, std::abs(curve[s]));
  }
  const double best = *std::max_element(distance.begin(), distance.end());
  // Distances within rounding of the maximum are ties.
  const double tolerance = 1e-12 * (scale + x1);
  for (std::size_t s = 0; s < count; ++s) {
    if (distance[s] >= best - tolerance) return s;
  }
  return 0;
}

DiffusionTime select_t(const Spectrum& spec, std::size_t t_max) {
  if (t_max < 3) throw ValidationError("select_t: t_max must be >= 3");
  DiffusionTime result;
  result.entropy.resize(t_max);
  for (std::size_t t = 1; t <= t_max; ++t) result.entropy[t - 1] = von_neumann_entropy(spec, t);
  result.t = knee_index(result.entropy) + 1;
  return result;
}

Matrix diffusion_map(const Spectrum& spec, std::size_t t, std::size_t ell) {
  if (ell + 1 > spec.vector_count()) {
    throw ValidationError("diffusion_map: " + std::to_string(ell) +
                          " coordinates need " + std::to_string(ell + 1) +
                          " eigenvectors, spectrum holds " + std::to_string(spec.vector_count()));
  }
  const auto rows = spec.right.rows();
  Matrix coords(rows, static_cast<Eigen::Index>(ell));
  for (std::size_t l = 1; l <= ell; ++l) {
    const double scale = std::pow(spec.eigenvalues(static_cast<Eigen::Index>(l)), static_cast<double>(t));
    coords.col(static_cast<Eigen::Index>(l - 1)) = scale * spec.right.col(static_cast<Eigen::Index>(l));
  }
  return coords;
}

Matrix matrix_power(const Matrix& transition, std::size_t t) {
  if (transition.rows() != transition.cols()) throw ValidationError("matrix_power: not square");
  const auto n = transition.rows();
  if (t == 0) return Matrix::Identity(n, n);

  Matrix base = transition;
  Matrix result;
  bool have_result = false;
  Matrix scratch(n, n);
  while (true) {
    if (t & 1u) {
      if (have_result) {
        gemm(result, base, scratch);
        result.swap(scratch);
      } else {
        result = base;
        have_result = true;
      }
    }
    t >>= 1u;
    if (t == 0) break;
    gemm(base, base, scratch);
    base.swap(scratch);
  }
  return result;
}

Matrix transition_power(const DiffusionOperator& op, std::size_t t) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (t == 0) return Matrix::Identity(n, n);
  const Vector root = op.degrees.cwiseSqrt();
  const Vector inv_root = root.cwiseInverse();

  // A^t for the symmetric conjugate A: squarings are symmetric rank updates.
  Matrix base = inv_root.asDiagonal() * op.symmetric_kernel * inv_root.asDiagonal();
  base = (0.5 * (base + base.transpose())).eval();
  Matrix result;
  bool have_result = false;
  Matrix scratch(n, n);
  while (true) {
    if (t & 1u) {
      if (have_result) {
        gemm(result, base, scratch);
        result.swap(scratch);
      } else {
        result = base;
        have_result = true;
      }
    }
    t >>= 1u;
    if (t == 0) break;
    square_symmetric(base, scratch);
    base.swap(scratch);
  }
  // P^t = D^-1/2 A^t D^1/2
  return inv_root.asDiagonal() * result * root.asDiagonal();
}

double diffusion_distance_oracle(const DiffusionOperator& op, std::size_t t, std::size_t i,
                                 std::size_t j) {
  const std::size_t n = op.size();
  if (i >= n || j >= n) throw ValidationError("diffusion_distance_oracle: index out of range");
  if (n > 1000) throw ValidationError("diffusion_distance_oracle: operator too large for dense powers");
  const Matrix powered = matrix_power(op.transition, t);
  const Vector stationary = op.degrees / op.degrees.sum();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double diff = powered(static_cast<Eigen::Index>(i), kk) - powered(static_cast<Eigen::Index>(j), kk);
    sum += diff * diff / stationary(kk);
  }
  return sum;
}

namespace {
constexpr double kFloor = 1e-300;
}  // namespace

Matrix diffusion_potential(const Matrix& powered, double gamma) {
  if (gamma == 1.0) {
    return powered.unaryExpr([](double v) { return -std::log(std::max(v, kFloor)); });
  }
  if (gamma == 0.0) {
    return powered.unaryExpr([](double v) { return 2.0 * std::sqrt(std::max(v, kFloor)); });
  }
  throw ValidationError("potential gamma must be 0 (sqrt) or 1 (log), got " + std::to_string(gamma));
}

Matrix potential_distance(const DiffusionOperator& op, std::size_t t, double gamma,
                          std::size_t max_points) {
  if (gamma != 0.0 && gamma != 1.0) {
    throw ValidationError("potential gamma must be 0 (sqrt) or 1 (log), got " + std::to_string(gamma));
  }
  if (op.size() > max_points) {
    throw ValidationError("operator has " + std::to_string(op.size()) +
                          " points, above the dense ceiling of " + std::to_string(max_points) +
                          "; landmark compression is not implemented");
  }
  // Columns of the transposed potential are the potential rows.
  const Matrix potential_columns = diffusion_potential(transition_power(op, t).transpose(), gamma);
  return pairwise_column_distances(potential_columns);
}

}  // namespace mphate
