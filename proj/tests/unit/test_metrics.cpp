#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mphate/error.hpp"
#include "mphate/metrics.hpp"
#include "mphate/random.hpp"
#include "oracles.hpp"

using namespace mphate;

namespace {

Embedding embedding_of(const Matrix& coords, std::size_t n, std::size_t m) {
  Embedding e;
  e.coords = coords;
  e.n_epochs = n;
  e.n_units = m;
  e.unit_layer.assign(m, 0);
  return e;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(r, c);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  return x;
}

TimeTrace trace_of(const Matrix& points, std::size_t n, std::size_t m) {
  std::vector<double> data;
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) data.push_back(points(r, c));
  }
  return TimeTrace(n, m, static_cast<std::size_t>(points.cols()), data, std::vector<int>(m, 0));
}

}  // namespace

TEST(Preservation, ProjectionOntoSupportIsPerfect) {
  // Variance only in the first two sample coordinates.
  Matrix pts = Matrix::Zero(4 * 12, 5);
  pts.leftCols(2) = random_matrix(48, 2, 3);
  const TimeTrace t = trace_of(pts, 4, 12);
  const Embedding e = embedding_of(pts.leftCols(2), 4, 12);
  EXPECT_EQ(intraslice_preservation(e, t, 3).mean, 1.0);
  EXPECT_EQ(interslice_preservation(e, t, 2).mean, 1.0);
}

TEST(Preservation, PermutationNullNearChance) {
  const std::size_t n = 3, m = 100;
  const Matrix pts = random_matrix(static_cast<Eigen::Index>(n * m), 4, 8);
  const TimeTrace t = trace_of(pts, n, m);
  Rng rng(1);
  double total = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Matrix shuffled(pts.rows(), 2);
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      shuffle(order, rng);
      for (std::size_t i = 0; i < m; ++i) shuffled.row(e * m + i) = pts.row(e * m + order[i]).leftCols(2);
    }
    total += intraslice_preservation(embedding_of(shuffled, n, m), t, 10).mean;
  }
  EXPECT_NEAR(total / 100.0, 10.0 / 99.0, 0.05);
}

TEST(Preservation, MatchesExhaustiveOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 3 + uniform_index(rng, 4);
    const std::size_t m = 3 + uniform_index(rng, 4);
    const Matrix pts = random_matrix(static_cast<Eigen::Index>(n * m), 3, seed + 50);
    // Coarse embedding coordinates produce exact distance ties.
    Matrix coords = random_matrix(static_cast<Eigen::Index>(n * m), 2, seed + 90);
    coords = coords.array().round().matrix();
    const TimeTrace t = trace_of(pts, n, m);
    const Embedding e = embedding_of(coords, n, m);
    for (std::size_t k = 1; k < m; ++k) {
      EXPECT_NEAR(intraslice_preservation(e, t, k).mean, oracle::intraslice_mean(e, t, k), 1e-12);
    }
    for (std::size_t k = 1; k < n; ++k) {
      EXPECT_NEAR(interslice_preservation(e, t, k).mean, oracle::interslice_mean(e, t, k), 1e-12);
    }
  }
}

TEST(Preservation, CollapsedUnitsUseIndexTieBreak) {
  const Matrix pts = random_matrix(12, 3, 4);
  const TimeTrace t = trace_of(pts, 3, 4);
  Matrix coords(12, 2);
  for (std::size_t e = 0; e < 3; ++e) {
    for (std::size_t i = 0; i < 4; ++i) coords.row(e * 4 + i) << static_cast<double>(i), 0.0;
  }
  const Embedding emb = embedding_of(coords, 3, 4);
  EXPECT_NEAR(interslice_preservation(emb, t, 1).mean, oracle::interslice_mean(emb, t, 1), 1e-15);
}

TEST(Preservation, RejectsOversizedK) {
  const Matrix pts = random_matrix(12, 3, 4);
  const Embedding e = embedding_of(pts.leftCols(2), 3, 4);
  EXPECT_THROW(intraslice_preservation(e, trace_of(pts, 3, 4), 4), ValidationError);
  EXPECT_THROW(interslice_preservation(e, trace_of(pts, 3, 4), 3), ValidationError);
}

TEST(Spearman, MonotoneAndHandRanked) {
  const std::vector<double> x = {0.5, 1.0, 2.0, 3.5, 7.0};
  std::vector<double> up, down;
  for (double v : x) {
    up.push_back(2 * v + 1);
    down.push_back(-v * v * v);
  }
  EXPECT_NEAR(spearman(x, up), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, down), -1.0, 1e-15);
  // Ranks {1, 2.5, 2.5, 4} vs {1, 3, 2, 4}: covariance 2.5 over sqrt(4.5 * 5) = 3/sqrt(10).
  const std::vector<double> a = {1, 2, 2, 4}, b = {1, 3, 2, 4};
  EXPECT_NEAR(spearman(a, b), 3.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(spearman(a, b), oracle::spearman(a, b), 1e-15);
}

TEST(Spearman, ErrorsAndInvariance) {
  const std::vector<double> c = {1, 1, 1}, x = {1, 2, 3};
  EXPECT_THROW(spearman(c, x), UndefinedCorrelationError);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ValidationError);
  Rng rng(2);
  std::vector<double> a(20), b(20), ea(20);
  for (int i = 0; i < 20; ++i) {
    a[i] = standard_normal(rng);
    b[i] = a[i] + standard_normal(rng);
    ea[i] = std::exp(3 * a[i]);
  }
  EXPECT_NEAR(spearman(a, b), spearman(ea, b), 1e-14);
  EXPECT_NEAR(spearman(a, b), oracle::spearman(a, b), 1e-14);
}

TEST(LossCorrelation, CoMonotoneDecay) {
  const std::size_t n = 8, m = 3;
  Matrix coords(n * m, 2);
  std::vector<double> losses;
  double pos = 0.0, loss = 5.0;
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t i = 0; i < m; ++i) coords.row(e * m + i) << pos + static_cast<double>(i), 0.0;
    losses.push_back(loss);
    pos += std::pow(0.5, static_cast<double>(e));
    loss -= std::pow(0.6, static_cast<double>(e));
  }
  EXPECT_NEAR(loss_correlation(embedding_of(coords, n, m), losses), 1.0, 1e-15);
  EXPECT_THROW(loss_correlation(embedding_of(Matrix::Zero(n * m, 2), n, m), losses), UndefinedCorrelationError);
}

TEST(LossCorrelation, MatchesDirectFormula) {
  const std::size_t n = 10, m = 4;
  const Matrix coords = random_matrix(n * m, 2, 6);
  Rng rng(9);
  std::vector<double> losses(n);
  for (double& l : losses) l = uniform01(rng);
  std::vector<double> rates, deltas;
  for (std::size_t e = 0; e + 1 < n; ++e) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += (coords.row((e + 1) * m + i) - coords.row(e * m + i)).norm();
    rates.push_back(s / m);
    deltas.push_back(std::abs(losses[e + 1] - losses[e]));
  }
  EXPECT_NEAR(loss_correlation(embedding_of(coords, n, m), losses), oracle::spearman(rates, deltas), 1e-14);
}

TEST(KMeans, SeparatedBlobsAndDeterminism) {
  Matrix x = random_matrix(40, 2, 3) * 0.1;
  x.bottomRows(20).array() += 10.0;
  const KMeansResult r = kmeans(x, 2, 5);
  for (int i = 1; i < 20; ++i) EXPECT_EQ(r.labels[i], r.labels[0]);
  for (int i = 21; i < 40; ++i) EXPECT_EQ(r.labels[i], r.labels[20]);
  EXPECT_NE(r.labels[0], r.labels[20]);
  EXPECT_EQ(kmeans(x, 2, 5).labels, r.labels);
  for (std::size_t s = 1; s < r.inertia_history.size(); ++s) {
    EXPECT_LE(r.inertia_history[s], r.inertia_history[s - 1] + 1e-12);
  }
}

TEST(KMeans, OneClusterPerPoint) {
  const Matrix x = random_matrix(7, 3, 1);
  const KMeansResult r = kmeans(x, 7, 0);
  std::vector<int> sorted = r.labels;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::unique(sorted.begin(), sorted.end()) - sorted.begin(), 7);
  EXPECT_THROW(kmeans(x, 8, 0), ValidationError);
}

TEST(KMeans, InertiaNonIncreasingOnRandomData) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KMeansResult r = kmeans(random_matrix(60, 3, seed), 5, seed);
    for (std::size_t s = 1; s < r.inertia_history.size(); ++s) {
      EXPECT_LE(r.inertia_history[s], r.inertia_history[s - 1] + 1e-12);
    }
  }
}

TEST(Ari, IdentityDegenerateAndHandTable) {
  const std::vector<int> a = {0, 0, 1, 1, 2, 2};
  EXPECT_EQ(ari(a, a), 1.0);
  const std::vector<int> one(6, 0);
  const std::vector<int> singles = {0, 1, 2, 3, 4, 5};
  EXPECT_EQ(ari(one, singles), 0.0);
  EXPECT_EQ(ari(one, one), 1.0);
  // Contingency {{1,1},{1,1}}: index 0, row and column sums 2 each, C(4,2) = 6.
  // expected = 2*2/6, max = 2, ARI = (0 - 2/3) / (2 - 2/3) = -0.5.
  const std::vector<int> x = {0, 0, 1, 1}, y = {0, 1, 0, 1};
  EXPECT_NEAR(ari(x, y), -0.5, 1e-15);
  EXPECT_NEAR(ari(x, y), oracle::pair_count_ari(x, y), 1e-15);
  // Contingency {{1,1},{0,2}}: index 1, row sums 2 + 2 and column sums 1 + 3 give expected 2*3/6 = 1.
  EXPECT_EQ(ari(x, std::vector<int>{0, 1, 1, 1}), 0.0);
  // Contingency {{2,0},{1,3}}: index 4, expected 7*6/15 = 2.8, max 6.5.
  const std::vector<int> u = {0, 0, 1, 1, 1, 1}, v = {0, 0, 0, 1, 1, 1};
  EXPECT_NEAR(ari(u, v), 1.2 / 3.7, 1e-15);
}

TEST(Ari, SymmetricAndLabelInvariant) {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> a(30), b(30), relabeled(30);
    for (int i = 0; i < 30; ++i) {
      a[i] = static_cast<int>(uniform_index(rng, 4));
      b[i] = static_cast<int>(uniform_index(rng, 3));
      relabeled[i] = 7 - a[i];
    }
    EXPECT_NEAR(ari(a, b), ari(b, a), 1e-15);
    EXPECT_NEAR(ari(a, b), ari(relabeled, b), 1e-15);
    EXPECT_NEAR(ari(a, b), oracle::pair_count_ari(a, b), 1e-12);
  }
}

TEST(SwitchAri, StaticEmbeddingIsOne) {
  const std::size_t n = 8, m = 30;
  const Matrix unit = random_matrix(m, 2, 2);
  Matrix coords(n * m, 2);
  for (std::size_t e = 0; e < n; ++e) coords.middleRows(e * m, m) = unit;
  const SwitchAriReport r = task_switch_ari(embedding_of(coords, n, m), {3, 6}, 2, 3, 8, 5);
  EXPECT_EQ(r.values.size(), 2u * 6 * 5);
  EXPECT_NEAR(r.mean, 1.0, 1e-15);
}

TEST(SwitchAri, ShuffledStructureIsNearZero) {
  const std::size_t n = 6, m = 60;
  Rng rng(7);
  Matrix coords(n * m, 2);
  for (std::size_t e = 0; e < n; ++e) {
    // Four tight clusters with unit membership redrawn at every slice.
    for (std::size_t i = 0; i < m; ++i) {
      const double c = static_cast<double>(uniform_index(rng, 4));
      coords.row(e * m + i) << 10.0 * c + 0.1 * standard_normal(rng), 0.1 * standard_normal(rng);
    }
  }
  const SwitchAriReport r = task_switch_ari(embedding_of(coords, n, m), {3}, 2, 3, 8, 20);
  EXPECT_NEAR(r.mean, 0.0, 0.1);
}

TEST(SwitchAri, DissolvingClusterMatchesDirectComputation) {
  const std::size_t n = 4, m = 40;
  Rng rng(11);
  Matrix coords(n * m, 2);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t i = 0; i < m; ++i) {
      double cx = static_cast<double>(i / 10) * 20.0;
      // Cluster 3 dissolves into cluster 0's position after the switch at slice 2.
      if (e >= 2 && i / 10 == 3) cx = 0.0;
      coords.row(e * m + i) << cx + 0.1 * standard_normal(rng), 0.1 * standard_normal(rng);
    }
  }
  const Embedding emb = embedding_of(coords, n, m);
  const SwitchAriReport r = task_switch_ari(emb, {2}, 2, 4, 4, 3);
  double expected = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Matrix before = coords.middleRows(1 * m, m);
    const Matrix after = coords.middleRows(3 * m, m);
    expected += ari(kmeans(before, 4, seed).labels, kmeans(after, 4, seed).labels);
  }
  EXPECT_NEAR(r.mean, expected / 3.0, 1e-15);
  EXPECT_GT(r.mean, 0.0);
  EXPECT_LT(r.mean, 1.0);
  EXPECT_THROW(task_switch_ari(emb, {3}, 2, 3, 8, 1), ValidationError);
}

TEST(PerSliceVariance, HandCasesAndOracle) {
  Matrix flat(6, 2);
  flat << 1, 2, 1, 2, 1, 2, 3, 4, 3, 4, 3, 4;
  EXPECT_EQ(per_slice_variance(embedding_of(flat, 2, 3)), 0.0);

  Matrix one(4, 2);
  one << 1, 1, -1, -1, 5, 5, 5, 5;
  EXPECT_NEAR(per_slice_variance(embedding_of(one, 2, 2)), 2.0, 1e-15);

  const Embedding r = embedding_of(random_matrix(15, 2, 3), 3, 5);
  EXPECT_NEAR(per_slice_variance(r), oracle::per_slice_variance(r), 1e-12);
}

TEST(PerSliceVariance, TranslationAndScaling) {
  const Matrix x = random_matrix(20, 2, 5);
  const double base = per_slice_variance(embedding_of(x, 4, 5));
  Matrix shifted = x;
  for (int e = 0; e < 4; ++e) shifted.middleRows(e * 5, 5).rowwise() += Eigen::RowVector2d(e * 3.0, -e);
  EXPECT_NEAR(per_slice_variance(embedding_of(shifted, 4, 5)), base, 1e-12);
  EXPECT_NEAR(per_slice_variance(embedding_of(2.5 * x, 4, 5)), 6.25 * base, 1e-12);
}

TEST(ComputeMetrics, SkipsInapplicableEntries) {
  const Matrix pts = random_matrix(3 * 12, 4, 1);
  const TimeTrace t = trace_of(pts, 3, 12);
  const MetricsReport r = compute_metrics(embedding_of(pts.leftCols(2), 3, 12), t, {});
  EXPECT_TRUE(r.intraslice_k10.has_value());
  EXPECT_FALSE(r.intraslice_k40.has_value());
  EXPECT_FALSE(r.interslice_k10.has_value());
  EXPECT_FALSE(r.loss_correlation.has_value());
  EXPECT_FALSE(r.switch_ari.has_value());
  EXPECT_GT(r.per_slice_variance, 0.0);
}
