#include "mphate/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

namespace {

constexpr std::size_t kDenseCutoff = 1200;
constexpr std::size_t kExtraBlock = 8;
constexpr int kMaxSubspaceIterations = 2000;
constexpr double kResidualTolerance = 1e-10;

SymmetricEigen dense_top(const Matrix& symmetric, std::size_t count) {
  SymmetricEigen full = symmetric_eigen(symmetric, true);
  const auto c = static_cast<Eigen::Index>(count);
  SymmetricEigen top;
  top.values = full.values.tail(c).reverse();
  top.vectors = full.vectors.rightCols(c).rowwise().reverse();
  fix_column_signs(top.vectors);
  return top;
}

Matrix orthonormalize(const Matrix& block) {
  Eigen::HouseholderQR<Matrix> qr(block);
  return qr.householderQ() * Matrix::Identity(block.rows(), block.cols());
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& symmetric, bool with_vectors) {
  if (symmetric.rows() != symmetric.cols()) {
    throw ValidationError("symmetric_eigen: matrix is not square");
  }
  const auto n = static_cast<lapack_int>(symmetric.rows());
  SymmetricEigen result;
  result.values.resize(n);
  if (n == 0) return result;

  Matrix work = symmetric;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'L', n,
                                         work.data(), n, result.values.data());
  if (info != 0) {
    throw ConvergenceError("symmetric eigensolver failed (dsyevd info=" + std::to_string(info) +
                           ")");
  }
  if (with_vectors) result.vectors = std::move(work);
  return result;
}

SymmetricEigen top_symmetric_eigen(const Matrix& symmetric, std::size_t count) {
  const auto n = static_cast<std::size_t>(symmetric.rows());
  if (count == 0 || count > n) {
    throw ValidationError("top_symmetric_eigen: requested " + std::to_string(count) +
                          " eigenpairs of a " + std::to_string(n) + "x" + std::to_string(n) +
                          " matrix");
  }
  const std::size_t block = std::min(n, count + kExtraBlock);
  if (n <= kDenseCutoff || 2 * block >= n) return dense_top(symmetric, count);

  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Matrix start(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(block));
  for (Eigen::Index j = 0; j < start.cols(); ++j)
    for (Eigen::Index i = 0; i < start.rows(); ++i) start(i, j) = uniform(rng);
  Matrix basis = orthonormalize(start);

  for (int iteration = 0; iteration < kMaxSubspaceIterations; ++iteration) {
    const Matrix image = symmetric * basis;
    Matrix projected = basis.transpose() * image;
    projected = (0.5 * (projected + projected.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(projected);
    const Vector& ritz = small.eigenvalues();  // ascending
    const Matrix& coeffs = small.eigenvectors();

    const double scale = ritz.cwiseAbs().maxCoeff();
    const double floor_magnitude = ritz.cwiseAbs().minCoeff();
    bool certified = scale > 0.0;
    for (std::size_t w = 0; w < count && certified; ++w) {
      const auto col = static_cast<Eigen::Index>(block - 1 - w);
      if (ritz(col) <= floor_magnitude * (1.0 + 1e-3)) certified = false;
      const Vector residual = image * coeffs.col(col) - ritz(col) * (basis * coeffs.col(col));
      if (residual.norm() > kResidualTolerance * scale) certified = false;
    }
    if (certified) {
      SymmetricEigen top;
      top.values.resize(static_cast<Eigen::Index>(count));
      top.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
      for (std::size_t w = 0; w < count; ++w) {
        const auto col = static_cast<Eigen::Index>(block - 1 - w);
        top.values(static_cast<Eigen::Index>(w)) = ritz(col);
        top.vectors.col(static_cast<Eigen::Index>(w)) = (basis * coeffs.col(col)).normalized();
      }
      fix_column_signs(top.vectors);
      return top;
    }
    basis = orthonormalize(image);
  }
  return dense_top(symmetric, count);
}

extern "C" {
void dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k, const double* alpha,
            const double* a, const int* lda, const double* b, const int* ldb, const double* beta, double* c,
            const int* ldc);
void dsyrk_(const char* uplo, const char* trans, const int* n, const int* k, const double* alpha, const double* a,
            const int* lda, const double* beta, double* c, const int* ldc);
}

namespace {

int blas_int(Eigen::Index v) {
  if (v > std::numeric_limits<int>::max()) throw ValidationError("matrix too large for BLAS");
  return static_cast<int>(v);
}

/// C (lower triangle) = alpha * A^T A for the k x n matrix A, mirrored to full.
void syrk_transposed(const Matrix& a, double alpha, Matrix& c) {
  const int n = blas_int(a.cols());
  const int k = blas_int(a.rows());
  c.resize(a.cols(), a.cols());
  if (n == 0) return;
  const double beta = 0.0;
  const int lda = std::max(1, k);
  dsyrk_("L", "T", &n, &k, &alpha, a.data(), &lda, &beta, c.data(), &n);
  for (Eigen::Index j = 0; j < c.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) c(i, j) = c(j, i);
}

}  // namespace

void gemm(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows()) throw ConsistencyError("gemm: inner dimensions differ");
  c.resize(a.rows(), b.cols());
  const int m = blas_int(a.rows());
  const int n = blas_int(b.cols());
  const int k = blas_int(a.cols());
  if (m == 0 || n == 0) return;
  if (k == 0) {
    c.setZero();
    return;
  }
  const double one = 1.0;
  const double zero = 0.0;
  dgemm_("N", "N", &m, &n, &k, &one, a.data(), &m, b.data(), &k, &zero, c.data(), &m);
}

void square_symmetric(const Matrix& a, Matrix& c) {
  if (a.rows() != a.cols()) throw ConsistencyError("square_symmetric: not square");
  syrk_transposed(a, 1.0, c);
}

Matrix pairwise_distances(const Eigen::Ref<const Matrix>& points) {
  return pairwise_column_distances(points.transpose());
}

Matrix pairwise_column_distances(const Matrix& columns) {
  const Eigen::Index n = columns.cols();
  Matrix distances = Matrix::Zero(n, n);
  auto exact = [&](Eigen::Index i, Eigen::Index j) { return (columns.col(i) - columns.col(j)).norm(); };

  if (n <= kExactDistanceLimit) {
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
      const auto i = static_cast<Eigen::Index>(ui);
      for (Eigen::Index j = i + 1; j < n; ++j) distances(j, i) = exact(i, j);
    });
  } else {
    // |a - b|^2 = |a|^2 + |b|^2 - 2 a.b from one symmetric rank update; pairs
    // close enough for cancellation to matter are recomputed directly.
    syrk_transposed(columns, -2.0, distances);
    const Vector norms = columns.colwise().squaredNorm().transpose();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ui) {
      const auto i = static_cast<Eigen::Index>(ui);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double scale = norms(i) + norms(j);
        const double sq = scale + distances(j, i);
        distances(j, i) = sq > 1e-3 * scale ? std::sqrt(sq) : exact(i, j);
      }
    });
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    distances(j, j) = 0.0;
    for (Eigen::Index i = 0; i < j; ++i) distances(i, j) = distances(j, i);
  }
  return distances;
}

void fix_column_signs(Matrix& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (columns.rows() > 0 && columns(best, j) < 0.0) columns.col(j) *= -1.0;
  }
}

}  // namespace mphate
