#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace mphate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Eigenpairs of a symmetric matrix, ascending by eigenvalue.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // empty when only values were requested
};

/// Full dense symmetric eigendecomposition (LAPACK dsyevd).
/// Throws ConvergenceError if the solver fails.
SymmetricEigen symmetric_eigen(const Matrix& symmetric, bool with_vectors);

/// The `count` algebraically largest eigenpairs of a symmetric matrix, descending.
/// Large inputs use block subspace iteration and fall back to the dense solver
/// whenever the iteration cannot certify the wanted pairs.
SymmetricEigen top_symmetric_eigen(const Matrix& symmetric, std::size_t count);

/// Exact pairwise Euclidean distances between the rows of `points`.
Matrix pairwise_distances(const Eigen::Ref<const Matrix>& points);

/// Same, between the columns of `columns`. Above kExactDistanceLimit columns
/// the Gram identity is used, with direct recomputation wherever
/// |a - b|^2 < 1e-3 (|a|^2 + |b|^2); relative error stays near 1e-12.
Matrix pairwise_column_distances(const Matrix& columns);

inline constexpr Eigen::Index kExactDistanceLimit = 1024;

/// c = a * b through BLAS dgemm. c must not alias a or b.
void gemm(const Matrix& a, const Matrix& b, Matrix& c);

/// c = a * a for symmetric a, through BLAS dsyrk (a a^T). c must not alias a.
void square_symmetric(const Matrix& a, Matrix& c);

/// Flip each column so that its largest-magnitude entry (first on ties) is positive.
void fix_column_signs(Matrix& columns);

}  // namespace mphate
