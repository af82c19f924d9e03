#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mphate/diffusion.hpp"
#include "mphate/kernel.hpp"
#include "mphate/linalg.hpp"
#include "mphate/trace.hpp"

namespace mphate {

// ---------------------------------------------------------------------------
// Multidimensional scaling

struct ClassicalMdsResult {
  Matrix coords;
  /// Number of strictly positive eigenvalues among the top `dim`.
  std::size_t positive_eigenvalues = 0;
  /// True when some requested columns had to be zero-padded.
  bool rank_deficient() const noexcept { return positive_eigenvalues < static_cast<std::size_t>(coords.cols()); }
};

/// Torgerson scaling: top eigenpairs of B = -1/2 J D^2 J, coords = V sqrt(Lambda).
/// Negative eigenvalues are truncated to zero; each column's largest-magnitude
/// entry is positive.
ClassicalMdsResult classical_mds(const Matrix& distances, std::size_t dim);

/// Raw stress sum_{i<j} (|x_i - x_j| - D_ij)^2.
double raw_stress(const Matrix& distances, const Matrix& coords);

struct SmacofResult {
  Matrix coords;
  /// Stress of the initial configuration followed by one entry per accepted iteration.
  std::vector<double> stress_history;
  std::size_t iterations = 0;
};

/// Metric stress majorization (Guttman transform) from `init`. Stops when the
/// relative stress decrease falls below `tol`, the stress vanishes, or after
/// `max_iter` iterations. A step that would raise the stress is rejected, so
/// the history is non-increasing.
SmacofResult smacof_mds(const Matrix& distances, const Matrix& init, std::size_t max_iter = 100,
                        double tol = 1e-6);

// ---------------------------------------------------------------------------
// Embedding pipelines

enum class Method {
  kMphate,
  kPhateStandard,
  kDmMultislice,
  kDmStandard,
  kIsomapMultislice,
  kIsomapStandard,
};

std::string to_string(Method method);
/// Accepts the CLI spellings (mphate, phate-standard, dm-multislice, ...).
Method parse_method(const std::string& name);

struct EmbedOptions {
  KernelParams kernel;
  /// Neighbor index for standard (single point cloud) kernels; defaults to kernel.k.
  std::size_t standard_knn = 0;
  std::size_t dim = 2;
  double gamma = 0.0;
  std::size_t t_max = 100;
  std::size_t smacof_max_iter = 100;
  double smacof_tol = 1e-6;
  /// Dense-path ceiling on N; larger inputs would need landmark compression.
  std::size_t max_points = kDefaultMaxPoints;
  /// Reserved for landmark subsampling; the dense pipeline is deterministic without it.
  std::uint64_t seed = 0;
};

/// Low-dimensional coordinates for every (epoch, unit) point of a trace.
struct Embedding {
  /// N x dim, row epoch * n_units + unit.
  Matrix coords;
  std::size_t n_epochs = 0;
  std::size_t n_units = 0;
  std::vector<int> unit_layer;
  Method method = Method::kMphate;
  KernelParams params;
  /// Selected diffusion time (0 for methods without one).
  std::size_t t = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> entropy;
  std::vector<double> stress_history;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords.cols()); }
  std::size_t row(std::size_t epoch, std::size_t unit) const noexcept { return epoch * n_units + unit; }
};

/// Alpha-decay kernel over all N = n*m rows treated as one point cloud,
/// symmetrized and row-normalized.
DiffusionOperator standard_kernel(const TimeTrace& trace, const KernelParams& params);

/// PHATE on an existing operator: VNE knee t, potential distances, classical
/// MDS, SMACOF refinement. Fills coords, t, entropy and stress history.
Embedding phate_embed_operator(const DiffusionOperator& op, const EmbedOptions& options);

/// M-PHATE: z-score (if needed), multislice kernel, diffusion operator, PHATE.
Embedding mphate(const TimeTrace& trace, const EmbedOptions& options);
Embedding standard_phate(const TimeTrace& trace, const EmbedOptions& options);
Embedding multislice_dm(const TimeTrace& trace, const EmbedOptions& options);
Embedding standard_dm(const TimeTrace& trace, const EmbedOptions& options);

/// Top-dim diffusion-map coordinates of an operator at its VNE knee t.
Embedding dm_embed_operator(const DiffusionOperator& op, const EmbedOptions& options);

/// All-pairs shortest paths over the graph with edge weights -log K'(i,j) on
/// the nonzero off-diagonal entries. Throws ConnectivityError if disconnected.
Matrix geodesic_distances(const Matrix& symmetric_kernel);

/// Isomap: classical MDS of the geodesic distances of a symmetric kernel.
Embedding isomap_embed(const Matrix& symmetric_kernel, std::size_t dim);
Embedding multislice_isomap(const TimeTrace& trace, const EmbedOptions& options);
Embedding standard_isomap(const TimeTrace& trace, const EmbedOptions& options);

/// Dispatches to the pipeline named by `method`.
Embedding embed(const TimeTrace& trace, Method method, const EmbedOptions& options);

// ---------------------------------------------------------------------------
// CSV interchange: header "epoch,unit,layer,x,y[,z]", one row per point,
// values with 9 significant digits.

void write_embedding_csv(std::ostream& out, const Embedding& embedding);
void write_embedding_csv_file(const std::string& path, const Embedding& embedding);
/// Reads coordinates, grid shape and layers back. Method metadata is not stored.
Embedding read_embedding_csv(std::istream& in);
Embedding read_embedding_csv_file(const std::string& path);

}  // namespace mphate
