#include "mphate/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

void KernelParams::validate(std::size_t n_epochs, std::size_t n_units) const {
  if (k < 1) throw ValidationError("kernel k must be >= 1");
  if (kappa < 1) throw ValidationError("kernel kappa must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("kernel alpha must be > 0");
  if (k >= n_units) {
    throw ValidationError("kernel k=" + std::to_string(k) + " needs more than " +
                          std::to_string(k) + " units, trace has " + std::to_string(n_units));
  }
  if (n_epochs >= 2 && kappa >= n_epochs) {
    throw ValidationError("kernel kappa=" + std::to_string(kappa) + " needs more than " +
                          std::to_string(kappa) + " epochs, trace has " +
                          std::to_string(n_epochs));
  }
}

double kth_neighbor_distance(const Eigen::Ref<const Vector>& distances, std::size_t self,
                             std::size_t k) {
  const auto n = static_cast<std::size_t>(distances.size());
  if (k < 1 || n < k + 1) {
    throw ValidationError("k-NN query needs " + std::to_string(k) + " neighbors besides itself, " +
                          "only " + std::to_string(n > 0 ? n - 1 : 0) + " available");
  }
  std::vector<double> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) others.push_back(distances(static_cast<Eigen::Index>(j)));
  }
  std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   others.end());
  return others[k - 1];
}

double knn_distance(const Eigen::Ref<const Matrix>& points, std::size_t query, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (query >= n) throw ValidationError("k-NN query index out of range");
  Vector distances(points.rows());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    distances(j) = (points.row(static_cast<Eigen::Index>(query)) - points.row(j)).norm();
  }
  return kth_neighbor_distance(distances, query, k);
}

Matrix intraslice_kernel(const TimeTrace& trace, std::size_t epoch, const KernelParams& params) {
  if (epoch >= trace.n_epochs()) throw ValidationError("intraslice_kernel: epoch out of range");
  const Matrix distances = pairwise_distances(trace.slice(epoch));
  const Eigen::Index m = distances.rows();
  Matrix kernel(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sigma = kth_neighbor_distance(distances.row(i).transpose(),
                                               static_cast<std::size_t>(i), params.k);
    if (!(sigma > 0.0)) {
      throw DegenerateBandwidthError("zero intraslice bandwidth for unit " + std::to_string(i) +
                                     " at epoch " + std::to_string(epoch) +
                                     " (duplicate activation rows)");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      kernel(i, j) = std::exp(-std::pow(distances(i, j) / sigma, params.alpha));
    }
  }
  return kernel;
}

double interslice_bandwidth(const TimeTrace& trace, std::size_t kappa) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  if (kappa < 1 || kappa >= n) {
    throw ValidationError("interslice kappa=" + std::to_string(kappa) + " requires more than " +
                          std::to_string(kappa) + " epochs, trace has " + std::to_string(n));
  }
  std::vector<double> per_unit(m, 0.0);
  parallel_for(m, [&](std::size_t i) {
    const Matrix distances = pairwise_distances(trace.trajectory(i));
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      sum += kth_neighbor_distance(distances.row(static_cast<Eigen::Index>(t)).transpose(), t,
                                   kappa);
    }
    per_unit[i] = sum;
  });
  double total = 0.0;
  for (double s : per_unit) total += s;
  const double epsilon = total / static_cast<double>(n * m);
  if (epsilon < 1e-12) {
    throw DegenerateBandwidthError("interslice bandwidth is zero: units do not move across epochs");
  }
  return epsilon;
}

Matrix interslice_kernel(const TimeTrace& trace, std::size_t unit, double epsilon) {
  if (unit >= trace.n_units()) throw ValidationError("interslice_kernel: unit out of range");
  if (!(epsilon > 0.0)) throw ValidationError("interslice_kernel: epsilon must be > 0");
  const Matrix distances = pairwise_distances(trace.trajectory(unit));
  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  return (-(distances.array().square() * inv_eps2)).exp().matrix();
}

MultisliceKernel::MultisliceKernel(std::vector<Matrix> intraslice, std::vector<Matrix> interslice)
    : intra_(std::move(intraslice)), inter_(std::move(interslice)) {
  const auto n = static_cast<Eigen::Index>(intra_.size());
  const auto m = static_cast<Eigen::Index>(inter_.size());
  if (n == 0 || m == 0) throw ConsistencyError("multislice kernel needs at least one epoch and unit");
  for (std::size_t t = 0; t < intra_.size(); ++t) {
    if (intra_[t].rows() != m || intra_[t].cols() != m) {
      throw ConsistencyError("intraslice block " + std::to_string(t) + " is " +
                             std::to_string(intra_[t].rows()) + "x" +
                             std::to_string(intra_[t].cols()) + ", expected " +
                             std::to_string(m) + "x" + std::to_string(m));
    }
  }
  for (std::size_t i = 0; i < inter_.size(); ++i) {
    if (inter_[i].rows() != n || inter_[i].cols() != n) {
      throw ConsistencyError("interslice matrix " + std::to_string(i) + " is " +
                             std::to_string(inter_[i].rows()) + "x" +
                             std::to_string(inter_[i].cols()) + ", expected " +
                             std::to_string(n) + "x" + std::to_string(n));
    }
  }
}

double MultisliceKernel::operator()(std::size_t row, std::size_t col) const {
  const std::size_t m = n_units();
  const std::size_t t = row / m;
  const std::size_t i = row % m;
  const std::size_t u = col / m;
  const std::size_t j = col % m;
  if (t == u) return intra_[t](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  if (i == j) return inter_[i](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u));
  return 0.0;
}

Matrix MultisliceKernel::dense() const {
  const std::size_t n = n_epochs();
  const std::size_t m = n_units();
  const auto big = static_cast<Eigen::Index>(n * m);
  const auto mm = static_cast<Eigen::Index>(m);
  Matrix out = Matrix::Zero(big, big);
  for (std::size_t t = 0; t < n; ++t) {
    out.block(static_cast<Eigen::Index>(t) * mm, static_cast<Eigen::Index>(t) * mm, mm, mm) =
        intra_[t];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t u = 0; u < n; ++u) {
        if (t == u) continue;
        out(static_cast<Eigen::Index>(index(t, i)), static_cast<Eigen::Index>(index(u, i))) =
            inter_[i](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u));
      }
    }
  }
  return out;
}

MultisliceKernel assemble(std::vector<Matrix> intraslice, std::vector<Matrix> interslice) {
  return MultisliceKernel(std::move(intraslice), std::move(interslice));
}

MultisliceKernel build_multislice_kernel(const TimeTrace& trace, const KernelParams& params) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  params.validate(n, m);

  std::vector<Matrix> intra(n);
  parallel_for(n, [&](std::size_t t) { intra[t] = intraslice_kernel(trace, t, params); });

  std::vector<Matrix> inter(m);
  if (n >= 2) {
    const double epsilon = interslice_bandwidth(trace, params.kappa);
    parallel_for(m, [&](std::size_t i) { inter[i] = interslice_kernel(trace, i, epsilon); });
  } else {
    for (auto& block : inter) block = Matrix::Ones(1, 1);
  }
  return assemble(std::move(intra), std::move(inter));
}

namespace {

DiffusionOperator normalize(Matrix symmetric, std::size_t n_units) {
  DiffusionOperator op;
  op.degrees = symmetric.rowwise().sum();
  for (Eigen::Index r = 0; r < op.degrees.size(); ++r) {
    if (!(op.degrees(r) > 0.0)) {
      std::string where = "node " + std::to_string(r);
      if (n_units > 0) {
        const auto ur = static_cast<std::size_t>(r);
        where = "(epoch " + std::to_string(ur / n_units) + ", unit " +
                std::to_string(ur % n_units) + ")";
      }
      throw DisconnectedNodeError("disconnected node " + where + ": zero degree after symmetrization");
    }
  }
  op.transition = op.degrees.cwiseInverse().asDiagonal() * symmetric;
  op.symmetric_kernel = std::move(symmetric);
  return op;
}

Matrix symmetrize(const Matrix& kernel) {
  if (kernel.rows() != kernel.cols()) throw ConsistencyError("kernel matrix must be square");
  if ((kernel.array() < 0.0).any() || !kernel.allFinite()) {
    throw ValidationError("kernel entries must be finite and nonnegative");
  }
  return 0.5 * (kernel + kernel.transpose());
}

}  // namespace

DiffusionOperator to_operator(const Matrix& kernel) { return normalize(symmetrize(kernel), 0); }

DiffusionOperator to_operator(const MultisliceKernel& kernel) {
  return normalize(symmetrize(kernel.dense()), kernel.n_units());
}

}  // namespace mphate
