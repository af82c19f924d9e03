#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "mphate/embed.hpp"
#include "mphate/error.hpp"
#include "mphate/parallel.hpp"

namespace mphate {

namespace {

/// Compressed adjacency of the graph K'(i,j) > 0, i != j.
struct Graph {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> targets;
  std::vector<double> weights;
  std::size_t size() const { return offsets.size() - 1; }
};

Graph build_graph(const Matrix& kernel) {
  const auto n = static_cast<std::size_t>(kernel.rows());
  Graph g;
  g.offsets.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const double w = kernel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w > 0.0) {
        g.targets.push_back(i);
        g.weights.push_back(-std::log(w));
      }
    }
    g.offsets[j + 1] = g.targets.size();
  }
  return g;
}

std::vector<std::vector<std::size_t>> components(const Graph& g) {
  const std::size_t n = g.size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> result;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> members{start};
    seen[start] = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
      const std::size_t v = members[head];
      for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        if (!seen[g.targets[e]]) {
          seen[g.targets[e]] = true;
          members.push_back(g.targets[e]);
        }
      }
    }
    result.push_back(std::move(members));
  }
  return result;
}

std::string describe(const std::vector<std::vector<std::size_t>>& parts) {
  std::string text = "kernel graph is disconnected: " + std::to_string(parts.size()) + " components";
  const std::size_t shown = std::min<std::size_t>(parts.size(), 8);
  for (std::size_t c = 0; c < shown; ++c) {
    text += c == 0 ? " [" : "; ";
    text += "size " + std::to_string(parts[c].size()) + " from node " + std::to_string(parts[c].front());
  }
  if (shown > 0) text += parts.size() > shown ? "; ...]" : "]";
  return text;
}

void dijkstra_heap(const Graph& g, std::size_t source, double* dist) {
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const double candidate = d + g.weights[e];
      if (candidate < dist[g.targets[e]]) {
        dist[g.targets[e]] = candidate;
        queue.emplace(candidate, g.targets[e]);
      }
    }
  }
}

/// O(N^2) scan variant for dense graphs.
void dijkstra_dense(const Graph& g, std::size_t source, double* dist) {
  const std::size_t n = g.size();
  std::vector<bool> done(n, false);
  dist[source] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t v = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < n; ++u) {
      if (!done[u] && dist[u] < best) {
        best = dist[u];
        v = u;
      }
    }
    if (v == n) break;
    done[v] = true;
    for (std::size_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const double candidate = best + g.weights[e];
      if (candidate < dist[g.targets[e]]) dist[g.targets[e]] = candidate;
    }
  }
}

}  // namespace

Matrix geodesic_distances(const Matrix& symmetric_kernel) {
  if (symmetric_kernel.rows() != symmetric_kernel.cols()) throw ConsistencyError("kernel must be square");
  if (!symmetric_kernel.allFinite()) throw ValidationError("kernel has non-finite entries");
  const auto n = static_cast<std::size_t>(symmetric_kernel.rows());
  for (Eigen::Index j = 0; j < symmetric_kernel.cols(); ++j) {
    for (Eigen::Index i = 0; i < symmetric_kernel.rows(); ++i) {
      const double w = symmetric_kernel(i, j);
      if (w < 0.0 || (i != j && w > 1.0)) throw ValidationError("kernel entries must lie in [0, 1]");
      if (w != symmetric_kernel(j, i)) throw ValidationError("kernel must be symmetric");
    }
  }

  const Graph g = build_graph(symmetric_kernel);
  const auto parts = components(g);
  if (parts.size() > 1) throw ConnectivityError(describe(parts));

  Matrix dist = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                 std::numeric_limits<double>::infinity());
  const double edges = static_cast<double>(g.targets.size());
  const double dense_edges = static_cast<double>(n) * static_cast<double>(n);
  const bool dense = edges * std::log2(static_cast<double>(n) + 2.0) > dense_edges;
  // Column s holds distances from source s; symmetric up to summation order.
  parallel_for(n, [&](std::size_t s) {
    double* column = dist.data() + s * n;
    if (dense) {
      dijkstra_dense(g, s, column);
    } else {
      dijkstra_heap(g, s, column);
    }
  });
  return dist;
}

Embedding isomap_embed(const Matrix& symmetric_kernel, std::size_t dim) {
  if (dim < 1) throw ValidationError("embedding dimension must be >= 1");
  Matrix geodesics = geodesic_distances(symmetric_kernel);
  geodesics = (0.5 * (geodesics + geodesics.transpose())).eval();
  Embedding e;
  e.coords = classical_mds(geodesics, dim).coords;
  return e;
}

}  // namespace mphate
