#include <cmath>
#include <string>
#include <vector>

#include "mphate/embed.hpp"
#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

std::string to_string(Method method) {
  switch (method) {
    case Method::kMphate: return "mphate";
    case Method::kPhateStandard: return "phate-standard";
    case Method::kDmMultislice: return "dm-multislice";
    case Method::kDmStandard: return "dm-standard";
    case Method::kIsomapMultislice: return "isomap-multislice";
    case Method::kIsomapStandard: return "isomap-standard";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kMphate, Method::kPhateStandard, Method::kDmMultislice, Method::kDmStandard,
                   Method::kIsomapMultislice, Method::kIsomapStandard}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown method '" + name + "'");
}

namespace {

TimeTrace normalized(const TimeTrace& trace) { return trace.zscored() ? trace : zscore(trace); }

void check_dim(std::size_t dim) {
  if (dim < 1) throw ValidationError("embedding dimension must be >= 1");
}

Embedding with_trace_shape(Embedding e, const TimeTrace& trace, Method method, const EmbedOptions& options) {
  e.n_epochs = trace.n_epochs();
  e.n_units = trace.n_units();
  e.unit_layer = trace.unit_layer();
  e.method = method;
  e.params = options.kernel;
  e.seed = options.seed;
  return e;
}

std::size_t standard_k(const EmbedOptions& options) {
  return options.standard_knn > 0 ? options.standard_knn : options.kernel.k;
}

DiffusionOperator multislice_operator(const TimeTrace& z, const KernelParams& params) {
  return to_operator(build_multislice_kernel(z, params));
}

DiffusionOperator standard_operator(const TimeTrace& z, const EmbedOptions& options) {
  KernelParams params = options.kernel;
  params.k = standard_k(options);
  return standard_kernel(z, params);
}

}  // namespace

DiffusionOperator standard_kernel(const TimeTrace& trace, const KernelParams& params) {
  const std::size_t n = trace.n_points();
  if (params.k < 1 || !(params.alpha > 0.0)) throw ValidationError("standard_kernel: need k >= 1 and alpha > 0");
  if (params.k >= n) {
    throw ValidationError("standard_kernel: k=" + std::to_string(params.k) + " needs more than " +
                          std::to_string(n) + " points");
  }
  const Matrix distances = pairwise_distances(trace.points());
  Matrix kernel(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t r) {
    const auto row = static_cast<Eigen::Index>(r);
    const double sigma = kth_neighbor_distance(distances.col(row), r, params.k);
    if (!(sigma > 0.0)) {
      throw DegenerateBandwidthError("standard kernel bandwidth is zero at epoch " +
                                     std::to_string(r / trace.n_units()) + ", unit " +
                                     std::to_string(r % trace.n_units()));
    }
    for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
      kernel(row, c) = std::exp(-std::pow(distances(c, row) / sigma, params.alpha));
    }
  });
  return to_operator(kernel);
}

Embedding phate_embed_operator(const DiffusionOperator& op, const EmbedOptions& options) {
  check_dim(options.dim);
  if (op.size() > options.max_points) {
    throw ValidationError("operator has " + std::to_string(op.size()) +
                          " points, above the dense ceiling of " + std::to_string(options.max_points));
  }
  const DiffusionTime time = select_t(spectral_decompose(op, 0), options.t_max);
  const Matrix distances = potential_distance(op, time.t, options.gamma, options.max_points);
  const ClassicalMdsResult initial = classical_mds(distances, options.dim);
  SmacofResult refined =
      smacof_mds(distances, initial.coords, options.smacof_max_iter, options.smacof_tol);

  Embedding e;
  e.coords = std::move(refined.coords);
  e.stress_history = std::move(refined.stress_history);
  e.t = time.t;
  e.entropy = time.entropy;
  e.gamma = options.gamma;
  return e;
}

Embedding dm_embed_operator(const DiffusionOperator& op, const EmbedOptions& options) {
  check_dim(options.dim);
  if (options.dim + 1 > op.size()) throw ValidationError("diffusion map needs more points than dimensions");
  const Spectrum spec = spectral_decompose(op, options.dim + 1);
  const DiffusionTime time = select_t(spec, options.t_max);
  Embedding e;
  e.coords = diffusion_map(spec, time.t, options.dim);
  e.t = time.t;
  e.entropy = time.entropy;
  return e;
}

Embedding mphate(const TimeTrace& trace, const EmbedOptions& options) {
  const TimeTrace z = normalized(trace);
  return with_trace_shape(phate_embed_operator(multislice_operator(z, options.kernel), options), trace,
                          Method::kMphate, options);
}

Embedding standard_phate(const TimeTrace& trace, const EmbedOptions& options) {
  const TimeTrace z = normalized(trace);
  return with_trace_shape(phate_embed_operator(standard_operator(z, options), options), trace,
                          Method::kPhateStandard, options);
}

Embedding multislice_dm(const TimeTrace& trace, const EmbedOptions& options) {
  const TimeTrace z = normalized(trace);
  return with_trace_shape(dm_embed_operator(multislice_operator(z, options.kernel), options), trace,
                          Method::kDmMultislice, options);
}

Embedding standard_dm(const TimeTrace& trace, const EmbedOptions& options) {
  const TimeTrace z = normalized(trace);
  return with_trace_shape(dm_embed_operator(standard_operator(z, options), options), trace,
                          Method::kDmStandard, options);
}

Embedding multislice_isomap(const TimeTrace& trace, const EmbedOptions& options) {
  const TimeTrace z = normalized(trace);
  const DiffusionOperator op = multislice_operator(z, options.kernel);
  return with_trace_shape(isomap_embed(op.symmetric_kernel, options.dim), trace, Method::kIsomapMultislice,
                          options);
}

Embedding standard_isomap(const TimeTrace& trace, const EmbedOptions& options) {
  const TimeTrace z = normalized(trace);
  const DiffusionOperator op = standard_operator(z, options);
  return with_trace_shape(isomap_embed(op.symmetric_kernel, options.dim), trace, Method::kIsomapStandard,
                          options);
}

Embedding embed(const TimeTrace& trace, Method method, const EmbedOptions& options) {
  switch (method) {
    case Method::kMphate: return mphate(trace, options);
    case Method::kPhateStandard: return standard_phate(trace, options);
    case Method::kDmMultislice: return multislice_dm(trace, options);
    case Method::kDmStandard: return standard_dm(trace, options);
    case Method::kIsomapMultislice: return multislice_isomap(trace, options);
    case Method::kIsomapStandard: return standard_isomap(trace, options);
  }
  throw ValidationError("unknown method");
}

}  // namespace mphate
