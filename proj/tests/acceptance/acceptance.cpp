// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: mphate_acceptance [--only <name>]... [--work-dir <dir>]
// The trained-network criteria take several minutes each; --only selects a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mphate/diffusion.hpp"
#include "mphate/embed.hpp"
#include "mphate/error.hpp"
#include "mphate/kernel.hpp"
#include "mphate/metrics.hpp"
#include "mphate/mlp.hpp"
#include "mphate/random.hpp"
#include "mphate/trace.hpp"
#include "mphate_cli/commands.hpp"
#include "mphate_cli/presets.hpp"
#include "oracles.hpp"

using namespace mphate;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

// Accumulates failures; the first failing message is kept as the detail.
struct Check {
  bool ok = true;
  std::string first;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) first = what;
    ok = ok && cond;
  }
};

Matrix random_kernel(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) k(i, j) = k(j, i) = uniform01(rng);
  }
  return k;
}

Matrix random_points(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(r, c);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  return x;
}

Matrix pairwise(const Matrix& x) {
  Matrix d(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.rows(); ++j) d(i, j) = (x.row(i) - x.row(j)).norm();
  }
  return d;
}

// ---------------------------------------------------------------------------

Outcome kernel_structure() {
  Check c;
  std::size_t entries = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(mix_seed(seed, 1));
    const std::size_t n = 2 + uniform_index(rng, 9);
    const std::size_t m = 3 + uniform_index(rng, 18);
    // Two samples would z-score every row to the same pair of points.
    const std::size_t p = 3 + uniform_index(rng, 13);
    KernelParams params;
    params.k = 1 + uniform_index(rng, 2);
    params.kappa = 1 + uniform_index(rng, n - 1);
    params.alpha = 1.0 + 9.0 * uniform01(rng);
    const TimeTrace z = zscore(oracle::random_trace(n, m, p, seed));
    const MultisliceKernel k = build_multislice_kernel(z, params);
    const Matrix dense = k.dense();
    const Matrix expected = oracle::case_kernel(z, params);
    for (std::size_t r = 0; r < n * m; ++r) {
      for (std::size_t q = 0; q < n * m; ++q) {
        const std::size_t t1 = r / m, i = r % m, t2 = q / m, j = q % m;
        const double got = dense(r, q);
        // Assembly copies component entries verbatim; the oracle re-derives them
        // with its own summation order, hence the 1e-12 on nonzero values.
        double component = 0.0;
        if (t1 == t2) component = k.intraslice(t1)(i, j);
        else if (i == j) component = k.interslice(i)(t1, t2);
        c.require(got == component, "assembled entry differs from its component matrix");
        if (expected(r, q) == 0.0) c.require(got == 0.0, "structural zero violated");
        else c.require(std::abs(got - expected(r, q)) <= 1e-12, "entry differs from piecewise-definition oracle");
        ++entries;
      }
    }
    const DiffusionOperator op = to_operator(k);
    c.require((op.symmetric_kernel - op.symmetric_kernel.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
              "K' not symmetric to 1e-12");
    c.require((op.transition.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10, "P rows not stochastic");
  }
  return {c.ok, c.ok ? "40 random traces, " + std::to_string(entries) + " entries" : c.first};
}

Outcome diffusion_identities() {
  Check c;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t n = 4 + 26 * seed / 11;
    const Matrix k = random_kernel(n, mix_seed(seed, 2));
    const Spectrum s = spectral_decompose(to_operator(k), n);
    c.require(von_neumann_entropy(s, 0) == std::log(static_cast<double>(n)), "VNE(0) != log N");
    for (std::size_t t = 1; t < 100; ++t) {
      c.require(von_neumann_entropy(s, t + 1) <= von_neumann_entropy(s, t), "VNE increased at t=" + std::to_string(t));
    }
    for (std::size_t t : {1u, 2u, 5u}) {
      const Matrix psi = diffusion_map(s, t, n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double want = oracle::diffusion_distance_sq(k, t, i, j);
          const double rel = std::abs((psi.row(i) - psi.row(j)).squaredNorm() - want) / want;
          worst = std::max(worst, rel);
        }
      }
    }
  }
  c.require(worst <= 1e-8, "diffusion distance relative error " + fmt("%.3g", worst));
  return {c.ok, c.ok ? "N in [4, 30], worst relative error " + fmt("%.2g", worst) : c.first};
}

Outcome mds_recovery() {
  Check c;
  const Matrix x = random_points(25, 2, 3);
  const ClassicalMdsResult r = classical_mds(pairwise(x), 2);
  const double rms = oracle::procrustes_rms(r.coords, x);
  c.require(rms < 1e-8, "Procrustes RMS " + fmt("%.3g", rms));
  std::size_t iterations = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix d = pairwise(random_points(15, 4, mix_seed(seed, 3)));
    const SmacofResult s = smacof_mds(d, random_points(15, 2, mix_seed(seed, 4)));
    for (std::size_t i = 1; i < s.stress_history.size(); ++i) {
      c.require(s.stress_history[i] <= s.stress_history[i - 1], "SMACOF stress increased on instance " + std::to_string(seed));
    }
    iterations += s.iterations;
  }
  return {c.ok, c.ok ? "Procrustes RMS " + fmt("%.2g", rms) + ", 100 SMACOF runs, " + std::to_string(iterations) +
                           " iterations"
                     : c.first};
}

Outcome isomap_geodesics() {
  Check c;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(mix_seed(seed, 5));
    Matrix k = Matrix::Identity(8, 8);
    // Random spanning path guarantees connectivity; extra chords make shortcuts.
    std::vector<std::size_t> order(8);
    for (std::size_t i = 0; i < 8; ++i) order[i] = i;
    shuffle(order, rng);
    for (std::size_t i = 0; i + 1 < 8; ++i) {
      k(order[i], order[i + 1]) = k(order[i + 1], order[i]) = 0.05 + 0.95 * uniform01(rng);
    }
    for (int e = 0; e < 8; ++e) {
      const auto i = static_cast<Eigen::Index>(uniform_index(rng, 8));
      const auto j = static_cast<Eigen::Index>(uniform_index(rng, 8));
      if (i != j) k(i, j) = k(j, i) = uniform01(rng);
    }
    const Matrix fw = oracle::floyd_warshall(k);
    const Matrix g = geodesic_distances(k);
    worst = std::max(worst, (g - fw).cwiseAbs().maxCoeff() / fw.maxCoeff());
  }
  // Dijkstra and Floyd-Warshall add the same edge weights in different orders.
  c.require(worst <= 1e-12, "geodesic relative error " + fmt("%.3g", worst));
  return {c.ok, c.ok ? "50 kernels, worst relative error " + fmt("%.2g", worst) : c.first};
}

Outcome gradient_checks() {
  Check c;
  const Matrix batch = random_points(4, 2, 6);
  const std::vector<int> labels = {0, 1, 1, 0};
  double worst = 0.0;
  for (Regularizer reg : {Regularizer::kNone, Regularizer::kKernelL1, Regularizer::kKernelL2, Regularizer::kActivityL1,
                          Regularizer::kActivityL2}) {
    Architecture a;
    a.inputs = 2;
    a.hidden = {3};
    a.outputs = 2;
    a.regularizer = reg;
    a.reg_weight = 0.05;
    const Network net = init_network(a, 7);
    Network grads;
    loss_and_grads(net, batch, labels, {}, false, 0, &grads);
    const double h = 1e-5;
    for (std::size_t p = 0; p < net.params.size(); ++p) {
      for (Eigen::Index i = 0; i < net.params[p].size(); ++i) {
        Network plus = net, minus = net;
        plus.params[p].data()[i] += h;
        minus.params[p].data()[i] -= h;
        const double fd = (loss_and_grads(plus, batch, labels, {}, false, 0, nullptr).loss -
                           loss_and_grads(minus, batch, labels, {}, false, 0, nullptr).loss) /
                          (2 * h);
        const double g = grads.params[p].data()[i];
        const double rel = std::abs(g - fd) / std::max(1e-3, std::abs(g) + std::abs(fd));
        worst = std::max(worst, rel);
        c.require(rel < 1e-4, to_string(reg) + " gradient mismatch " + fmt("%.3g", rel));
      }
    }
  }
  return {c.ok, c.ok ? "5 regularizers, worst relative error " + fmt("%.2g", worst) : c.first};
}

Outcome metric_oracles() {
  Check c;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(mix_seed(seed, 8));
    const std::size_t n = 2 + uniform_index(rng, 5), m = 2 + uniform_index(rng, 5);
    const TimeTrace t = oracle::random_trace(n, m, 3, seed);
    Embedding e;
    e.n_epochs = n;
    e.n_units = m;
    e.unit_layer.assign(m, 0);
    e.coords = random_points(static_cast<Eigen::Index>(n * m), 2, mix_seed(seed, 9)).array().round().matrix();
    for (std::size_t k = 1; k < m; ++k) {
      c.require(std::abs(intraslice_preservation(e, t, k).mean - oracle::intraslice_mean(e, t, k)) <= 1e-12,
                "intraslice preservation differs from exhaustive oracle");
    }
    for (std::size_t k = 1; k < n; ++k) {
      c.require(std::abs(interslice_preservation(e, t, k).mean - oracle::interslice_mean(e, t, k)) <= 1e-12,
                "interslice preservation differs from exhaustive oracle");
    }
    c.require(std::abs(per_slice_variance(e) - oracle::per_slice_variance(e)) <= 1e-12,
              "per-slice variance differs from two-pass oracle");
  }
  // Hand contingency tables.
  c.require(std::abs(ari(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}) + 0.5) <= 1e-15,
            "ARI table {{1,1},{1,1}} != -0.5");
  // {{2,0},{1,3}} with rows (2,4), cols (3,3): index 1+3=4, expected 7*6/15=2.8, max 6.5.
  const double ari2 = ari(std::vector<int>{0, 0, 1, 1, 1, 1}, std::vector<int>{0, 0, 0, 1, 1, 1});
  c.require(std::abs(ari2 - (4.0 - 2.8) / (6.5 - 2.8)) <= 1e-15, "ARI table {{2,0},{1,3}} mismatch");
  c.require(ari(std::vector<int>{0, 0, 1, 1, 2, 2}, std::vector<int>{5, 5, 3, 3, 4, 4}) == 1.0, "ARI relabeling != 1");
  return {c.ok, c.ok ? "40 instances with n, m <= 6; 3 ARI tables" : c.first};
}

// ---------------------------------------------------------------------------
// Trained-network criteria share runs.

struct Trained {
  cli::PresetRun run;
  TimeTrace trace;
  Embedding embedding;
};

class Cache {
 public:
  explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const Trained& get(const std::string& preset, std::uint64_t seed, bool drop_dead) {
    const std::string key = preset + "#" + std::to_string(seed);
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    cli::PresetOptions options;
    options.seed = seed;
    Trained t{cli::run_preset(preset, options), TimeTrace(), Embedding()};
    t.trace = drop_dead ? drop_dead_units(t.run.trace).first : t.run.trace;
    t.embedding = mphate::mphate(t.trace, EmbedOptions{});
    std::printf("  %s: %zu x %zu points, t=%zu\n", key.c_str(), t.trace.n_epochs(), t.trace.n_units(), t.embedding.t);
    std::fflush(stdout);
    return runs_.emplace(key, std::move(t)).first->second;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, Trained> runs_;
};

constexpr std::uint64_t kSeed = 1;

Outcome preservation_trend(Cache& cache) {
  const Trained& v = cache.get("generalization-vanilla", kSeed, false);
  const Embedding standard = standard_phate(v.trace, EmbedOptions{});
  const TimeTrace z = zscore(v.trace);
  const double m_intra = intraslice_preservation(v.embedding, z, 10).mean;
  const double s_intra = intraslice_preservation(standard, z, 10).mean;
  const double m_inter = interslice_preservation(v.embedding, z, 10).mean;
  const bool ok = m_intra >= 1.5 * s_intra && m_inter >= 0.7;
  return {ok, "intraslice k10 " + fmt("%.3f", m_intra) + " vs standard " + fmt("%.3f", s_intra) + " (ratio " +
                  fmt("%.2f", m_intra / s_intra) + ", need >= 1.5); interslice k10 " + fmt("%.3f", m_inter) +
                  " (need >= 0.7)"};
}

Outcome variance_trend(Cache& cache) {
  std::vector<double> variance, memorization;
  std::map<std::string, double> by_name;
  std::ostringstream detail;
  for (const std::string& preset : cli::generalization_presets()) {
    const Trained& t = cache.get(preset, kSeed, false);
    variance.push_back(per_slice_variance(t.embedding));
    memorization.push_back(t.run.memorization_error);
    by_name[preset] = variance.back();
    detail << preset.substr(std::string("generalization-").size()) << " var " << fmt("%.3g", variance.back())
           << " mem " << fmt("%.3g", memorization.back()) << "; ";
  }
  const double rho = spearman(memorization, variance);
  const double dropout = by_name["generalization-dropout"], vanilla = by_name["generalization-vanilla"],
               activity = by_name["generalization-activity-l1"];
  const bool ok = dropout > vanilla && vanilla > activity && rho <= -0.6;
  detail << "ordering dropout > vanilla > activity-l1: " << (dropout > vanilla && vanilla > activity ? "yes" : "no")
         << "; rho " << fmt("%.3f", rho) << " (need <= -0.6)";
  return {ok, detail.str()};
}

Outcome continual_trend(Cache& cache) {
  std::vector<double> ari_means, losses;
  std::ostringstream detail;
  for (const std::string& base : cli::continual_presets()) {
    for (const std::string& opt : cli::continual_optimizers()) {
      const std::string preset = base + "-" + opt;
      const Trained& t = cache.get(preset, kSeed, true);
      ari_means.push_back(task_switch_ari(t.embedding, t.run.meta.task_switches).mean);
      losses.push_back(t.run.final_val_loss);
      detail << preset.substr(std::string("continual-").size()) << " ari " << fmt("%.3f", ari_means.back())
             << " loss " << fmt("%.3f", losses.back()) << "; ";
    }
  }
  const double rho = spearman(ari_means, losses);
  detail << "rho " << fmt("%.3f", rho) << " (need <= -0.5)";
  return {rho <= -0.5, detail.str()};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome end_to_end(const std::filesystem::path& dir) {
  std::vector<std::string> bytes;
  std::ostringstream sink;
  for (const std::string tag : {"a", "b"}) {
    const std::string trace = (dir / ("e2e_" + tag + ".mph")).string();
    const std::string emb = (dir / ("e2e_" + tag + ".csv")).string();
    const std::string report = (dir / ("e2e_" + tag + ".json")).string();
    const std::string svg = (dir / ("e2e_" + tag + ".svg")).string();
    // Ten epochs keep the run short; kappa must stay below the epoch count.
    const std::vector<std::vector<std::string>> steps = {
        {"generate", "--preset", "generalization-dropout", "--seed", "7", "--epochs", "10", "-o", trace},
        {"embed", trace, "--kappa", "5", "--seed", "7", "-o", emb},
        {"metrics", trace, emb, "-o", report},
        {"plot", trace, emb, "--coloring", "most_active_label", "--subsample", "16", "--seed", "7", "-o", svg}};
    for (const auto& args : steps) {
      if (cli::run(args, sink, sink) != cli::kExitOk) return {false, args[0] + " failed: " + sink.str()};
    }
    bytes.push_back(slurp(trace) + slurp(trace + ".curves.csv") + slurp(emb) + slurp(report) + slurp(svg));
  }
  return {bytes[0] == bytes[1], bytes[0] == bytes[1] ? std::to_string(bytes[0].size()) + " bytes identical across runs"
                                                      : "outputs differ between runs"};
}

struct Criterion {
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only;
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "mphate_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) only.insert(argv[++i]);
    else if (a == "--work-dir" && i + 1 < argc) dir = argv[++i];
    else {
      std::fprintf(stderr, "usage: %s [--only <criterion>]... [--work-dir <dir>]\n", argv[0]);
      return 2;
    }
  }
  std::filesystem::create_directories(dir);
  Cache cache(dir);

  // Time limits of the shared trained-network criteria include the runs they trigger.
  const std::vector<Criterion> criteria = {
      {"kernel-structure", 1, kernel_structure},
      {"diffusion-identities", 5, diffusion_identities},
      {"mds", 10, mds_recovery},
      {"isomap-geodesics", 5, isomap_geodesics},
      {"gradient-checks", 5, gradient_checks},
      {"metric-oracles", 0, metric_oracles},
      {"preservation-trend", 600, [&] { return preservation_trend(cache); }},
      {"variance-memorization-trend", 1800, [&] { return variance_trend(cache); }},
      {"continual-trend", 1800, [&] { return continual_trend(cache); }},
      {"end-to-end-determinism", 0, [&] { return end_to_end(dir); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1fs", secs);
    if (c.limit_s > 0) {
      timing += fmt(" of %.0fs", c.limit_s);
      if (secs > c.limit_s) {
        o.pass = false;
        o.detail += "; over time limit";
      }
    }
    std::printf("%s %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
