// Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails. Every tolerance is a named constant below.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "cli_app.hpp"
#include "spinpath/spinpath.hpp"

namespace fs = std::filesystem;
using namespace spinpath;

namespace tol {
constexpr double exactness = 1e-10;
constexpr double identity = 1e-12;
constexpr double fixed_point_residual = 1e-12;
constexpr double node_doubling = 1e-10;
constexpr double beta0_equation = 1e-10;
constexpr double beta0_lo = 0.07, beta0_hi = 0.08;
constexpr double sigmas = 4.0;
constexpr double derivative_relative = 1e-6;
constexpr double residual_fraction = 0.05;
constexpr double residual_floor = 1e-4;
constexpr double qv_relative = 0.10;
constexpr double overlap_ratio = 2.0;
constexpr double overlap_decoupled = 1e-10;
constexpr double sk_band_lo = 0.6, sk_band_hi = 1.4;
constexpr double gap_sigmas = 2.0;
constexpr double perceptron_band_lo = 0.5, perceptron_band_hi = 1.5;
constexpr double delta_phi_ratio_lo = 1.0 / 6.0, delta_phi_ratio_hi = 2.0 / 3.0;
constexpr double telescoping = 1e-10;
constexpr double cf_sup = 0.1;
}  // namespace tol

namespace {

constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

struct VarEstimate {
  double value;
  double std_error;
};

VarEstimate zero_mean_variance(const std::vector<double>& x) {
  std::vector<double> sq(x.size());
  std::transform(x.begin(), x.end(), sq.begin(), [](double v) { return v * v; });
  return {stats::mean(sq), stats::std_error(sq)};
}

std::uint64_t path_seed(std::uint64_t master, std::size_t j) {
  return derive_seed(master, static_cast<std::uint64_t>(j), streams::path);
}

// Shared between the SK fluctuation and characteristic function criteria.
FluctuationRecord& sk_run_n20() {
  static FluctuationRecord r = [] {
    ExperimentConfig c;
    c.n = 20;
    c.samples = 2000;
    c.seed = kSeed;
    return run_sk_clt(c);
  }();
  return r;
}

Outcome exactness() {
  const BoundedU u = BoundedU::scaled_tanh();
  double worst_sk = 0.0, worst_perc = 0.0;
  for (std::size_t s = 0; s < 20; ++s) {
    const int n = 3 + static_cast<int>(s % 10);
    NormalStream normal(sample_seed(kSeed, s));
    const SkParams p{0.05, 0.3, n};
    const SkDisorder g = SkDisorder::sample(n, normal);
    worst_sk = std::max(worst_sk, std::abs(sk_partition_exact(g, p).log_z - oracle::sk_log_z(g, p)));
    const PerceptronDisorder pg = PerceptronDisorder::sample(n, 2, normal);
    worst_perc = std::max(worst_perc, std::abs(perceptron_partition_exact(pg, u, 2) - oracle::perceptron_log_z(pg, u, 2)));
  }
  return {worst_sk <= tol::exactness && worst_perc <= tol::exactness,
          "20 draws, N in 3..12: max |dlogZ| sk " + fmt(worst_sk) + ", perceptron " + fmt(worst_perc) + " (tol " +
              fmt(tol::exactness) + ")"};
}

Outcome identities() {
  double worst_pairs = 0.0, worst_singles = 0.0;
  for (int n : {4, 6, 8, 12})
    for (std::size_t s = 0; s < 10; ++s) {
      NormalStream normal(sample_seed(kSeed + static_cast<std::uint64_t>(n), s));
      const SkParams p{0.05, 0.3, n};
      const SkDisorder g = SkDisorder::sample(n, normal);
      const GibbsTables t = gibbs_single_site_expectations(g, p);
      const oracle::ReplicaMoments o = oracle::sk_replica_moments(g, p, 0.0);
      double pairs = 0.0, singles = 0.0;
      for (int i = 0; i < n; ++i) {
        singles += t.spin(i) * t.spin(i);
        for (int j = i + 1; j < n; ++j) pairs += t.pair(i, j) * t.pair(i, j);
      }
      worst_pairs = std::max(worst_pairs, std::abs(pairs - 0.5 * n * n * (o.r2 - 1.0 / n)));
      worst_singles = std::max(worst_singles, std::abs(singles - n * o.r1));
    }
  return {worst_pairs <= tol::identity && worst_singles <= tol::identity,
          "N in {4,6,8,12} x 10 draws: pair identity " + fmt(worst_pairs) + ", single identity " +
              fmt(worst_singles) + " (tol " + fmt(tol::identity) + ")"};
}

Outcome fixed_points() {
  bool decoupled = true;
  for (double h : {0.0, 0.1, 0.3, 1.0, 2.5}) decoupled = decoupled && solve_q_sk(0.0, h).q == std::tanh(h) * std::tanh(h);
  const SkFixedPoint fp = solve_q_sk(0.05, 0.3);
  const double doubling = std::abs(solve_q_sk(0.05, 0.3, {}, QuadraturePolicy::fixed(64)).q -
                                   solve_q_sk(0.05, 0.3, {}, QuadraturePolicy::fixed(128)).q);
  const Beta0 b = beta0();
  const double eq = std::abs(std::sqrt(162.0) * b.value * std::exp(16.0 * b.value * b.value) - 1.0);
  const bool pass = decoupled && fp.residual < tol::fixed_point_residual && doubling <= tol::node_doubling &&
                    eq <= tol::beta0_equation && b.value > tol::beta0_lo && b.value < tol::beta0_hi;
  return {pass, std::string("beta=0 exact ") + (decoupled ? "yes" : "no") + "; q=" + fmt(fp.q) + " residual " +
                    fmt(fp.residual) + "; 64->128 nodes " + fmt(doubling) + "; beta0=" + fmt(b.value) +
                    " equation residual " + fmt(eq)};
}

Outcome reversed_bm_law() {
  const TimeGrid g(256);
  const int ks[3] = {g.index_of(0.25), g.index_of(0.5), g.index_of(0.75)};
  std::vector<std::vector<double>> xs(3);
  bool ends_at_zero = true;
  for (std::size_t j = 0; j < 100'000; ++j) {
    NormalStream normal(path_seed(kSeed, j));
    const std::vector<double> x = sample_reversed_bm(g, normal(), normal);
    ends_at_zero = ends_at_zero && x.back() == 0.0;
    for (int a = 0; a < 3; ++a) xs[a].push_back(x[static_cast<std::size_t>(ks[a])]);
  }
  bool pass = ends_at_zero;
  std::string detail = std::string("X(1)=0 on all paths: ") + (ends_at_zero ? "yes" : "no");
  for (int a = 0; a < 3; ++a) {
    const double target = 1.0 - g.t(ks[a]);
    const VarEstimate v = zero_mean_variance(xs[a]);
    const double z = std::abs(v.value - target) / v.std_error;
    pass = pass && z <= tol::sigmas;
    detail += "; Var X(" + fmt(g.t(ks[a])) + ")=" + fmt(v.value) + " (" + fmt(z) + " se)";
  }
  return {pass, detail};
}

Outcome backward_heat() {
  auto sq = [](std::span<const double> x) { return x[0] * x[0]; };
  auto sq_lap = [](std::span<const double>) { return 2.0; };
  auto quart = [](std::span<const double> x) { return x[0] * x[0] * x[0] * x[0]; };
  auto quart_lap = [](std::span<const double> x) { return 12.0 * x[0] * x[0]; };
  bool pass = true;
  std::string detail;
  for (double t : {0.5, 1.0}) {
    const Estimate a = backward_heat_residual(sq, sq_lap, 1, t, 100'000, 256, kSeed);
    const Estimate b = backward_heat_residual(quart, quart_lap, 1, t, 100'000, 256, kSeed + 1);
    const double za = std::abs(a.value) / a.std_error, zb = std::abs(b.value) / b.std_error;
    pass = pass && za <= tol::sigmas && zb <= tol::sigmas;
    detail += (detail.empty() ? "" : "; ") + std::string("t=") + fmt(t) + ": x^2 " + fmt(za) + " se, x^4 " + fmt(zb) + " se";
  }
  return {pass, detail};
}

Outcome derivative() {
  const SkParams p{0.05, 0.3, 6};
  const double q = solve_q_sk(0.05, 0.3).q;
  const TimeGrid g(256);
  std::mt19937_64 pick(kSeed);
  double worst = 0.0;
  for (std::size_t j = 0; j < 20; ++j) {
    const SkPath path = SkPath::sample(6, g, path_seed(kSeed, j));
    const int k = static_cast<int>(pick() % static_cast<std::uint64_t>(g.steps()));
    const int i = static_cast<int>(pick() % 6);
    const DerivativeCheck d = rho_derivative_check(p, q, path, k, i);
    worst = std::max(worst, std::abs(d.analytic - d.finite_difference) / std::abs(d.analytic));
  }
  return {worst < tol::derivative_relative, "N=6, 20 path points: max relative error " + fmt(worst)};
}

Outcome decomposition() {
  const SkParams p{0.05, 0.3, 8};
  const double q = solve_q_sk(0.05, 0.3).q;
  const int levels[4] = {8, 4, 2, 1};  // coarsening of the 2^11 grid
  const std::size_t paths = 50;
  std::vector<std::array<double, 4>> res(paths);
  std::vector<double> y(paths), drift(paths);
  parallel_for(paths, 0, [&](std::size_t j) {
    const SkPath fine = SkPath::sample(8, TimeGrid(2048), path_seed(kSeed, j));
    for (int l = 0; l < 4; ++l) {
      const DecompositionRecord r = decompose_y(p, q, levels[l] == 1 ? fine : fine.coarsen(levels[l])).back();
      res[j][static_cast<std::size_t>(l)] = std::abs(r.residual);
      if (levels[l] == 1) {
        y[j] = std::abs(r.y);
        drift[j] = r.v1 - r.v2;
      }
    }
  });
  std::array<double, 4> mean{};
  for (const auto& r : res)
    for (int l = 0; l < 4; ++l) mean[static_cast<std::size_t>(l)] += r[static_cast<std::size_t>(l)] / paths;
  bool monotone = true;
  for (int l = 1; l < 4; ++l) monotone = monotone && mean[static_cast<std::size_t>(l)] < mean[static_cast<std::size_t>(l - 1)];
  const double y_mean = stats::mean(y);
  const double bound = tol::residual_fraction * y_mean + tol::residual_floor;
  const double z = std::abs(stats::mean(drift)) / stats::std_error(drift);
  const bool pass = monotone && mean[3] < bound && z <= tol::sigmas;
  return {pass, "mean|residual| S=2^8..2^11: " + fmt(mean[0]) + ", " + fmt(mean[1]) + ", " + fmt(mean[2]) + ", " +
                    fmt(mean[3]) + (monotone ? " (decreasing)" : " (NOT decreasing)") + "; bound " + fmt(bound) +
                    "; E[V1-V2]=" + fmt(stats::mean(drift)) + " (" + fmt(z) + " se)"};
}

Outcome quadratic_variation() {
  const SkParams p{0.05, 0.3, 8};
  const double q = solve_q_sk(0.05, 0.3).q;
  const TimeGrid g(4096);
  double acc = 0.0;
  std::mt19937_64 pick(kSeed);
  for (std::size_t j = 0; j < 100; ++j) {
    const SkPath path = SkPath::sample(8, g, path_seed(kSeed + 1, j));
    acc += realized_qv(hamiltonian_path(SpinConfig::from_bits(8, pick()), p, q, path));
  }
  const double mean = acc / 100.0, target = expected_qv(p, q, 1.0);
  const double rel = std::abs(mean - target) / target;
  return {rel <= tol::qv_relative, "N=8, S=2^12, 100 paths: QV " + fmt(mean) + " vs " + fmt(target) + " (relative " + fmt(rel) + ")"};
}

Outcome overlap_concentration() {
  const std::vector<OverlapRow> rows = run_overlap_concentration({8, 12, 16, 20}, 0.05, 0.3, 500, kSeed);
  double lo = rows.front().scaled, hi = lo;
  std::string detail = "N*E[rho((R-q)^2)]:";
  for (const OverlapRow& r : rows) {
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
    detail += " " + std::to_string(r.n) + "->" + fmt(r.scaled);
  }
  double worst = 0.0;
  for (const OverlapRow& r : run_overlap_concentration({8, 12, 16, 20}, 0.0, 0.0, 2, kSeed))
    worst = std::max(worst, std::abs(r.scaled - 1.0));
  detail += "; max/min " + fmt(hi / lo) + "; beta=h=0 deviation " + fmt(worst);
  return {hi / lo < tol::overlap_ratio && worst <= tol::overlap_decoupled, detail};
}

Outcome sk_clt() {
  const FluctuationRecord& r20 = sk_run_n20();
  ExperimentConfig c;
  c.samples = 2000;
  c.seed = kSeed;
  c.n = 12;
  const FluctuationRecord r12 = run_sk_clt(c);
  c.n = 16;
  const FluctuationRecord r16 = run_sk_clt(c);
  const double tau2 = r20.tau2;
  const double z = std::abs(r20.mean) / r20.std_error;
  const bool band = r20.variance_ci.intersects(tol::sk_band_lo * tau2, tol::sk_band_hi * tau2);
  auto se_of = [](const FluctuationRecord& r) { return (r.variance_ci.hi - r.variance_ci.lo) / (2.0 * 1.96); };
  const double gap12 = std::abs(r12.variance - tau2), gap16 = std::abs(r16.variance - tau2), gap20 = std::abs(r20.variance - tau2);
  const double slack = tol::gap_sigmas * std::hypot(se_of(r12), se_of(r20));
  const bool gap_ok = gap20 <= gap12 + slack;

  ExperimentConfig zero = c;
  zero.n = 20;
  zero.beta = 0.0;
  const FluctuationRecord r0 = run_sk_clt(zero);
  const bool control = std::all_of(r0.values.begin(), r0.values.end(), [](double v) { return v == 0.0; });

  return {z <= tol::sigmas && band && gap_ok && control,
          "N=20: mean " + fmt(r20.mean) + " (" + fmt(z) + " se); var " + fmt(r20.variance) + " CI [" +
              fmt(r20.variance_ci.lo) + ", " + fmt(r20.variance_ci.hi) + "] vs tau2 " + fmt(tau2) + (band ? "" : " (no overlap)") +
              "; |var-tau2| N=12,16,20: " + fmt(gap12) + ", " + fmt(gap16) + ", " + fmt(gap20) + " (literal non-growth " +
              (gap20 <= gap12 ? "yes" : "no") + ", within " + fmt(tol::gap_sigmas) + " se " + (gap_ok ? "yes" : "no") +
              "); beta=0 all zero " + (control ? "yes" : "no")};
}

Outcome perceptron_clt() {
  ExperimentConfig c;
  c.model = ModelTag::perceptron;
  c.n = 16;
  c.alpha = 0.125;
  c.u_scale = 0.2;
  c.samples = 2000;
  c.seed = kSeed;
  const FluctuationRecord r = run_perceptron_clt(c);
  const double z = std::abs(r.mean) / r.std_error;
  const bool band = r.variance_ci.intersects(tol::perceptron_band_lo * r.tau2, tol::perceptron_band_hi * r.tau2);
  ExperimentConfig zero = c;
  zero.u_scale = 0.0;
  const FluctuationRecord r0 = run_perceptron_clt(zero);
  const bool control = std::all_of(r0.values.begin(), r0.values.end(), [](double v) { return v == 0.0; });
  return {z <= tol::sigmas && band && control,
          "N=16, M=2: mean " + fmt(r.mean) + " (" + fmt(z) + " se); var " + fmt(r.variance) + " CI [" + fmt(r.variance_ci.lo) +
              ", " + fmt(r.variance_ci.hi) + "] vs band [" + fmt(tol::perceptron_band_lo * r.tau2) + ", " +
              fmt(tol::perceptron_band_hi * r.tau2) + "] with tau2 " + fmt(r.tau2) + "; u=0 all zero " +
              (control ? "yes" : "no")};
}

Outcome delta_phi() {
  const BoundedU u = BoundedU::scaled_tanh();
  const double alpha = 0.125;
  const double r8 = delta_phi_residual(8, static_cast<int>(std::ceil(alpha * 8)), u);
  const double r16 = delta_phi_residual(16, static_cast<int>(std::ceil(alpha * 16)), u);
  const double ratio = r16 / r8;
  return {ratio >= tol::delta_phi_ratio_lo && ratio <= tol::delta_phi_ratio_hi,
          "alpha=1/8: residual N=8 " + fmt(r8) + ", N=16 " + fmt(r16) + ", ratio " + fmt(ratio)};
}

Outcome telescoping() {
  const BoundedU u = BoundedU::scaled_tanh();
  double worst = 0.0;
  for (std::size_t s = 0; s < 10; ++s) {
    NormalStream normal(sample_seed(kSeed, s));
    worst = std::max(worst, telescoping_check(PerceptronDisorder::sample(12, 3, normal), u, 3).max_residual);
  }
  return {worst <= tol::telescoping, "N=12, M=3, 10 draws: max residual " + fmt(worst)};
}

Outcome characteristic_function() {
  const FluctuationRecord& r = sk_run_n20();
  double sup = 0.0;
  for (const CfRow& row : empirical_cf(r.values, cf_grid(r.tau2, 11), r.tau2)) sup = std::max(sup, row.distance());
  return {sup < tol::cf_sup, "N=20 run, 11 points on [-3/tau, 3/tau]: sup distance " + fmt(sup)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const std::vector<std::vector<std::string>> cases{
      {"constants"},
      {"solve-q"},
      {"beta0"},
      {"perceptron-fp"},
      {"sk-exact", "--n", "8"},
      {"perceptron-exact", "--n", "8"},
      {"sde-check", "--n", "6", "--samples", "200", "--steps", "256"},
      {"decompose", "--n", "6", "--steps", "256"},
      {"sk-clt", "--n", "10", "--samples", "200"},
      {"overlap-conc", "--n", "6,8", "--samples", "50"},
      {"perceptron-clt", "--n", "8", "--samples", "100"},
      {"telescope", "--n", "10"},
      {"cf-check", "--n", "10", "--samples", "200"},
  };
  const fs::path root = fs::temp_directory_path() / "spinpath-acceptance";
  fs::remove_all(root);
  std::string bad;
  std::size_t files = 0;
  for (const auto& args : cases) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "3"}) {
      const fs::path dir = root / (args[0] + "-" + threads);
      std::vector<std::string> full{"spinpath"};
      full.insert(full.end(), args.begin(), args.end());
      full.insert(full.end(), {"--seed", "7", "--threads", threads, "--out-dir", dir.string()});
      if (args[0] == "constants" || args[0] == "solve-q" || args[0] == "beta0" || args[0] == "perceptron-fp")
        full.erase(full.end() - 6, full.end() - 4);  // these take no seed
      std::vector<const char*> argv;
      for (const auto& a : full) argv.push_back(a.c_str());
      std::ostringstream out, err;
      if (cli::run(static_cast<int>(argv.size()), argv.data(), out, err) != 0) bad += " " + args[0] + "(exit)";
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename()))
        bad += " " + args[0] + "/" + entry.path().filename().string();
    }
  }
  return {bad.empty() && files > 0, std::to_string(cases.size()) + " subcommands, " + std::to_string(files) +
                                        " CSV files compared across --threads 1 and 3" +
                                        (bad.empty() ? ": all identical" : "; differing:" + bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact partition functions", exactness},
      {"replica table identities", identities},
      {"fixed points and beta0", fixed_points},
      {"reversed Brownian motion law", reversed_bm_law},
      {"backward heat identity", backward_heat},
      {"field derivative of the magnetization", derivative},
      {"fluctuation decomposition", decomposition},
      {"quadratic variation", quadratic_variation},
      {"overlap concentration", overlap_concentration},
      {"SK free-energy fluctuations", sk_clt},
      {"perceptron free-energy fluctuations", perceptron_clt},
      {"free-energy increment residual scaling", delta_phi},
      {"telescoping over patterns", telescoping},
      {"characteristic function", characteristic_function},
      {"determinism across worker counts", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " AC" << std::setw(2) << std::setfill('0') << k + 1 << std::setfill(' ')
              << ' ' << criteria[k].first << ": " << o.detail << " [" << fmt(secs) << " s]" << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << '/' << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
