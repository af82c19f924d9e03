#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mphate/kernel.hpp"
#include "mphate/linalg.hpp"

namespace mphate {

/// Eigenstructure of a diffusion operator P = D^-1 K'.
///
/// Computed through the symmetric conjugate A = D^-1/2 K' D^-1/2, so every
/// eigenvalue is real by construction. Eigenvalues are ordered by magnitude,
/// descending, with the stationary eigenvalue 1 first. Right and left vectors
/// are scaled so that psi_0 is the constant one vector and phi_0 is the
/// stationary distribution (sums to 1); then phi_a^T psi_b = delta_ab.
struct Spectrum {
  /// All N eigenvalues.
  Vector eigenvalues;
  /// N x ell right eigenvectors psi_0..psi_{ell-1} (empty when not requested).
  Matrix right;
  /// N x ell left eigenvectors phi_0..phi_{ell-1}.
  Matrix left;
  /// N x ell orthonormal eigenvectors of the symmetric conjugate.
  Matrix conjugate_basis;

  std::size_t vector_count() const noexcept { return static_cast<std::size_t>(right.cols()); }
};

/// Full eigenvalue spectrum plus the leading `ell` eigenvector pairs (ell may be 0).
/// Throws ConvergenceError if the eigensolver fails.
Spectrum spectral_decompose(const DiffusionOperator& op, std::size_t ell);

/// Von Neumann entropy of the t-step operator: entropy of |lambda|^t normalized
/// to a probability vector. Terms with mass below 1e-300 contribute nothing.
double von_neumann_entropy(const Vector& eigenvalues, std::size_t t);
inline double von_neumann_entropy(const Spectrum& spec, std::size_t t) {
  return von_neumann_entropy(spec.eigenvalues, t);
}

/// Selected diffusion time and the curve it was picked from.
struct DiffusionTime {
  std::size_t t = 1;
  /// entropy[s] = H(s + 1), s = 0..t_max-1
  std::vector<double> entropy;
  std::string method = "vne-knee";
};

/// Index (0-based) of the point farthest from the chord joining the first and
/// last samples of a curve. Earliest index wins ties.
std::size_t knee_index(std::span<const double> curve);

/// Knee of the Von Neumann entropy curve over t = 1..t_max (t_max >= 3).
DiffusionTime select_t(const Spectrum& spec, std::size_t t_max = 100);

/// Diffusion map coordinates: columns lambda_l^t psi_l for l = 1..ell.
Matrix diffusion_map(const Spectrum& spec, std::size_t t, std::size_t ell);

/// P^t of a general square matrix by binary powering in float64.
Matrix matrix_power(const Matrix& transition, std::size_t t);

/// P^t of a diffusion operator through its symmetric conjugate,
/// D^-1/2 A^t D^1/2, so squarings cost half a general product.
Matrix transition_power(const DiffusionOperator& op, std::size_t t);

/// Brute-force diffusion distance sum_k (P^t(i,k) - P^t(j,k))^2 / pi(k), with
/// pi the stationary distribution. Returns the squared distance.
double diffusion_distance_oracle(const DiffusionOperator& op, std::size_t t, std::size_t i,
                                 std::size_t j);

/// Largest N the dense potential-distance path accepts before landmark
/// compression would be required.
inline constexpr std::size_t kDefaultMaxPoints = 20000;

/// Pairwise L2 distances between transformed rows of P^t. gamma = 1 uses the
/// log potential -log P^t, gamma = 0 the square-root potential 2 sqrt(P^t).
/// Entries of P^t are floored at 1e-300 before the transform.
Matrix potential_distance(const DiffusionOperator& op, std::size_t t, double gamma,
                          std::size_t max_points = kDefaultMaxPoints);

/// The transformed potential rows alone (N x N).
Matrix diffusion_potential(const Matrix& powered, double gamma);

}  // namespace mphate
