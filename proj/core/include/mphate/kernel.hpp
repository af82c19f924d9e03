#pragma once

#include <cstddef>
#include <vector>

#include "mphate/linalg.hpp"
#include "mphate/trace.hpp"

namespace mphate {

/// Multislice kernel parameters. Defaults follow the published M-PHATE settings.
struct KernelParams {
  /// Neighbor index for the adaptive intraslice bandwidth.
  std::size_t k = 2;
  /// Decay exponent of the alpha-decay intraslice kernel.
  double alpha = 5.0;
  /// Neighbor index for the interslice bandwidth.
  std::size_t kappa = 25;

  /// Checks k, kappa >= 1, alpha > 0, k < n_units and (for n_epochs >= 2) kappa < n_epochs.
  void validate(std::size_t n_epochs, std::size_t n_units) const;

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// Distance from row `query` of `points` to its k-th nearest other row.
/// The query row itself is never counted as a neighbor.
double knn_distance(const Eigen::Ref<const Matrix>& points, std::size_t query, std::size_t k);

/// k-th smallest entry of a distance row, skipping index `self`.
double kth_neighbor_distance(const Eigen::Ref<const Vector>& distances, std::size_t self,
                             std::size_t k);

/// Alpha-decay affinities among the units of one epoch:
/// exp(-(|T(t,i) - T(t,j)| / sigma_(t,i))^alpha), with sigma the k-NN distance
/// of unit i within the slice. Row-dependent, hence asymmetric; unit diagonal.
Matrix intraslice_kernel(const TimeTrace& trace, std::size_t epoch, const KernelParams& params);

/// Mean over all (epoch, unit) of the kappa-NN distance of T(t,i) within unit i's
/// own trajectory.
double interslice_bandwidth(const TimeTrace& trace, std::size_t kappa);

/// Gaussian affinities of one unit with itself across epochs:
/// exp(-|T(t,i) - T(u,i)|^2 / epsilon^2). Symmetric with unit diagonal.
Matrix interslice_kernel(const TimeTrace& trace, std::size_t unit, double epsilon);

/// Structure-aware storage of the nm x nm multislice affinity matrix.
///
/// Point (epoch t, unit i) has flat index t*m + i. Entries between different
/// epochs and different units are structurally zero.
class MultisliceKernel {
 public:
  MultisliceKernel(std::vector<Matrix> intraslice, std::vector<Matrix> interslice);

  std::size_t n_epochs() const noexcept { return intra_.size(); }
  std::size_t n_units() const noexcept { return inter_.size(); }
  std::size_t size() const noexcept { return n_epochs() * n_units(); }

  std::size_t index(std::size_t epoch, std::size_t unit) const noexcept {
    return epoch * n_units() + unit;
  }

  const Matrix& intraslice(std::size_t epoch) const { return intra_.at(epoch); }
  const Matrix& interslice(std::size_t unit) const { return inter_.at(unit); }

  /// Entry ((t,i),(u,j)) by the multislice case rule; the intraslice branch
  /// wins on the diagonal.
  double operator()(std::size_t row, std::size_t col) const;

  /// Materialized N x N matrix.
  Matrix dense() const;

 private:
  std::vector<Matrix> intra_;
  std::vector<Matrix> inter_;
};

/// Combines per-epoch intraslice blocks (m x m each) and per-unit interslice
/// matrices (n x n each). Throws ConsistencyError on mismatched dimensions.
MultisliceKernel assemble(std::vector<Matrix> intraslice, std::vector<Matrix> interslice);

/// Full multislice kernel of a (normally z-scored) trace.
/// Single-epoch traces yield a kernel with no interslice coupling.
MultisliceKernel build_multislice_kernel(const TimeTrace& trace, const KernelParams& params);

/// Row-stochastic Markov operator from a nonnegative affinity kernel.
struct DiffusionOperator {
  /// K' = (K + K^T) / 2
  Matrix symmetric_kernel;
  /// Row sums of K'.
  Vector degrees;
  /// P = D^-1 K'
  Matrix transition;

  std::size_t size() const noexcept { return static_cast<std::size_t>(degrees.size()); }
};

/// Symmetrizes and row-normalizes. Throws DisconnectedNodeError on a zero-degree row.
DiffusionOperator to_operator(const Matrix& kernel);
DiffusionOperator to_operator(const MultisliceKernel& kernel);

}  // namespace mphate
