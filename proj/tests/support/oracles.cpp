#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

#include "mphate/random.hpp"

namespace oracle {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double kth_distance(const std::vector<std::vector<double>>& rows, std::size_t query, std::size_t k) {
  std::vector<double> d;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j != query) d.push_back(distance(rows[query], rows[j]));
  }
  std::sort(d.begin(), d.end());
  return d.at(k - 1);
}

namespace {

std::vector<double> row_copy(const mphate::TimeTrace& trace, std::size_t t, std::size_t i) {
  const auto r = trace.row(t, i);
  return {r.begin(), r.end()};
}

}  // namespace

Matrix case_kernel(const mphate::TimeTrace& trace, const mphate::KernelParams& params) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();

  // sigma(t, i): k-th neighbor within slice t.
  std::vector<std::vector<double>> sigma(n, std::vector<double>(m));
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<std::vector<double>> slice;
    for (std::size_t i = 0; i < m; ++i) slice.push_back(row_copy(trace, t, i));
    for (std::size_t i = 0; i < m; ++i) sigma[t][i] = kth_distance(slice, i, params.k);
  }
  // epsilon: mean over (t, i) of the kappa-th neighbor within unit i's trajectory.
  double epsilon = 0.0;
  if (n >= 2) {
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::vector<double>> traj;
      for (std::size_t t = 0; t < n; ++t) traj.push_back(row_copy(trace, t, i));
      for (std::size_t t = 0; t < n; ++t) epsilon += kth_distance(traj, t, params.kappa);
    }
    epsilon /= static_cast<double>(n * m);
  }

  Matrix k = Matrix::Zero(static_cast<Eigen::Index>(n * m), static_cast<Eigen::Index>(n * m));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t j = 0; j < m; ++j) {
          const auto r = static_cast<Eigen::Index>(t * m + i);
          const auto c = static_cast<Eigen::Index>(u * m + j);
          const double d = distance(trace.row(t, i), trace.row(u, j));
          if (t == u) {
            k(r, c) = std::exp(-std::pow(d / sigma[t][i], params.alpha));
          } else if (i == j) {
            k(r, c) = std::exp(-(d * d) / (epsilon * epsilon));
          }
        }
      }
    }
  }
  return k;
}

Matrix transition(const Matrix& kernel) {
  const Eigen::Index n = kernel.rows();
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) d += 0.5 * (kernel(i, j) + kernel(j, i));
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = 0.5 * (kernel(i, j) + kernel(j, i)) / d;
  }
  return p;
}

Matrix naive_power(const Matrix& p, std::size_t t) {
  const Eigen::Index n = p.rows();
  Matrix out = Matrix::Identity(n, n);
  for (std::size_t s = 0; s < t; ++s) {
    Matrix next = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) next(i, j) += out(i, k) * p(k, j);
      }
    }
    out = next;
  }
  return out;
}

double diffusion_distance_sq(const Matrix& kernel, std::size_t t, std::size_t i, std::size_t j) {
  const Eigen::Index n = kernel.rows();
  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  double volume = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) degree[static_cast<std::size_t>(a)] += 0.5 * (kernel(a, b) + kernel(b, a));
    volume += degree[static_cast<std::size_t>(a)];
  }
  const Matrix pt = naive_power(transition(kernel), t);
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double diff = pt(static_cast<Eigen::Index>(i), k) - pt(static_cast<Eigen::Index>(j), k);
    s += diff * diff / (degree[static_cast<std::size_t>(k)] / volume);
  }
  return s;
}

Matrix floyd_warshall(const Matrix& kernel) {
  const Eigen::Index n = kernel.rows();
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d = Matrix::Constant(n, n, inf);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && kernel(i, j) > 0.0) d(i, j) = -std::log(kernel(i, j));
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
      }
    }
  }
  return d;
}

double procrustes_rms(const Matrix& x, const Matrix& y) {
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const Eigen::RowVectorXd my = y.colwise().mean();
  const Matrix xc = x.rowwise() - mx;
  const Matrix yc = y.rowwise() - my;
  Eigen::JacobiSVD<Matrix> svd(xc.transpose() * yc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rotation = svd.matrixU() * svd.matrixV().transpose();
  const Matrix residual = xc * rotation - yc;
  return std::sqrt(residual.squaredNorm() / static_cast<double>(x.rows()));
}

std::vector<std::size_t> exhaustive_knn(const std::vector<double>& distances, std::size_t self, std::size_t k) {
  const std::size_t n = distances.size();
  auto before = [&](std::size_t a, std::size_t b) {
    return distances[a] < distances[b] || (distances[a] == distances[b] && a < b);
  };
  std::vector<std::size_t> found;
  std::size_t matches = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (mask & (1u << self)) continue;
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    bool ok = true;
    for (std::size_t a = 0; a < n && ok; ++a) {
      if (!(mask & (1u << a))) continue;
      for (std::size_t b = 0; b < n && ok; ++b) {
        if (b == self || (mask & (1u << b))) continue;
        if (!before(a, b)) ok = false;
      }
    }
    if (ok) {
      ++matches;
      found.clear();
      for (std::size_t a = 0; a < n; ++a) {
        if (mask & (1u << a)) found.push_back(a);
      }
    }
  }
  if (matches != 1) throw std::logic_error("k-NN set is not unique");
  return found;
}

namespace {

double overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t shared = 0;
  for (std::size_t x : a) shared += static_cast<std::size_t>(std::count(b.begin(), b.end(), x));
  return static_cast<double>(shared) / static_cast<double>(a.size());
}

std::vector<double> coord_row(const mphate::Embedding& v, std::size_t t, std::size_t i) {
  std::vector<double> out;
  for (Eigen::Index c = 0; c < v.coords.cols(); ++c) out.push_back(v.coords(static_cast<Eigen::Index>(v.row(t, i)), c));
  return out;
}

}  // namespace

double intraslice_mean(const mphate::Embedding& v, const mphate::TimeTrace& trace, std::size_t k) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> dv(m), dt(m);
      for (std::size_t j = 0; j < m; ++j) {
        dv[j] = distance(coord_row(v, t, i), coord_row(v, t, j));
        dt[j] = distance(trace.row(t, i), trace.row(t, j));
      }
      total += overlap(exhaustive_knn(dv, i, k), exhaustive_knn(dt, i, k));
    }
  }
  return total / static_cast<double>(n * m);
}

double interslice_mean(const mphate::Embedding& v, const mphate::TimeTrace& trace, std::size_t k) {
  const std::size_t n = trace.n_epochs();
  const std::size_t m = trace.n_units();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < n; ++t) {
      std::vector<double> dv(n), dt(n);
      for (std::size_t u = 0; u < n; ++u) {
        dv[u] = distance(coord_row(v, t, i), coord_row(v, u, i));
        dt[u] = distance(trace.row(t, i), trace.row(u, i));
      }
      total += overlap(exhaustive_knn(dv, t, k), exhaustive_knn(dt, t, k));
    }
  }
  return total / static_cast<double>(n * m);
}

double pair_count_ari(std::span<const int> a, std::span<const int> b) {
  // n11: together in both; n10: together in a only; n01: in b only; n00: apart in both.
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      if (sa && sb) n11 += 1;
      else if (sa) n10 += 1;
      else if (sb) n01 += 1;
      else n00 += 1;
    }
  }
  const double denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
  return 2.0 * (n00 * n11 - n01 * n10) / denom;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  auto ranks = [](std::span<const double> v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) less += 1;
        if (w == v[i]) equal += 1;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double per_slice_variance(const mphate::Embedding& v) {
  double total = 0.0;
  for (std::size_t t = 0; t < v.n_epochs; ++t) {
    for (Eigen::Index c = 0; c < v.coords.cols(); ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < v.n_units; ++i) mean += v.coords(static_cast<Eigen::Index>(v.row(t, i)), c);
      mean /= static_cast<double>(v.n_units);
      double ss = 0.0;
      for (std::size_t i = 0; i < v.n_units; ++i) {
        const double d = v.coords(static_cast<Eigen::Index>(v.row(t, i)), c) - mean;
        ss += d * d;
      }
      total += ss / static_cast<double>(v.n_units);
    }
  }
  return total;
}

mphate::TimeTrace random_trace(std::size_t n, std::size_t m, std::size_t p, std::uint64_t seed) {
  mphate::Rng rng(seed);
  std::vector<double> data(n * m * p);
  for (double& x : data) x = 2.0 * mphate::uniform01(rng) - 1.0;
  return mphate::TimeTrace(n, m, p, std::move(data), std::vector<int>(m, 0));
}

}  // namespace oracle
