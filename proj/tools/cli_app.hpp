#pragma once

// The spinpath command line. Kept in a header so tests can drive it in-process.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinpath/spinpath.hpp"

namespace spinpath::cli {

enum Flag : unsigned {
  kN = 1U << 0,
  kBeta = 1U << 1,
  kH = 1U << 2,
  kAlpha = 1U << 3,
  kUScale = 1U << 4,
  kSamples = 1U << 5,
  kSeed = 1U << 6,
  kSteps = 1U << 7,
};

inline constexpr const char* kDefaultOutDir = "spinpath-out";

/// Fully resolved inputs handed to a subcommand.
struct Context {
  ExperimentConfig cfg;
  std::vector<int> n_list;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

struct Command {
  std::string name;
  std::string help;
  unsigned flags = 0;
  ExperimentConfig defaults;
  std::function<void(const Context&)> run;
  std::vector<int> n_list_default{};  // non-empty: --n takes a comma-separated list
};

namespace detail {

inline void kv(std::ostream& os, const std::string& key, double v) { os << key << '=' << csv::num(v) << '\n'; }
inline void kv(std::ostream& os, const std::string& key, long long v) { os << key << '=' << v << '\n'; }
inline void kv(std::ostream& os, const std::string& key, int v) { os << key << '=' << v << '\n'; }

inline SkParams sk_params(const ExperimentConfig& c) { return {c.beta, c.h, c.n}; }

inline int required_patterns(const ExperimentConfig& c) {
  const int m = c.patterns();
  require(m >= 1, "alpha * n must round to at least one pattern", "alpha");
  return m;
}

inline void write_samples(const Context& ctx, const std::string& name, const FluctuationRecord& r) {
  auto os = csv::open_output(ctx.out_dir, name);
  csv::Writer w(os, {"sample_index", "seed", "fluctuation_value"});
  for (std::size_t s = 0; s < r.values.size(); ++s)
    w.row(static_cast<unsigned long long>(s), static_cast<unsigned long long>(r.seeds[s]), r.values[s]);
}

inline void print_record(const Context& ctx, const FluctuationRecord& r) {
  kv(ctx.out, "mean", r.mean);
  kv(ctx.out, "std_error", r.std_error);
  kv(ctx.out, "var", r.variance);
  kv(ctx.out, "ci_lo", r.variance_ci.lo);
  kv(ctx.out, "ci_hi", r.variance_ci.hi);
  kv(ctx.out, "tau2", r.tau2);
  kv(ctx.out, "ks_distance", r.ks_distance);
  kv(ctx.out, "ks_threshold", 1.5 * r.ks_critical);
}

inline FluctuationRecord sk_clt(const Context& ctx) {
  if (ctx.cfg.beta >= beta0().value)
    ctx.err << "warning: beta = " << csv::num(ctx.cfg.beta) << " is not below beta0\n";
  ExperimentConfig c = ctx.cfg;
  c.model = ModelTag::sk;
  return run_sk_clt(c);
}

// ---------------------------------------------------------------------------
// Subcommands

inline void cmd_constants(const Context& ctx) {
  const auto& c = ctx.cfg;
  const SkFixedPoint fp = solve_q_sk(c.beta, c.h);
  const Beta0 b0 = beta0();
  const SkVariances v = sk_variances(c.beta, c.h);
  const BoundedU u = c.potential();
  const PerceptronFixedPoint pf = solve_perceptron_fp(c.alpha, u);
  const double tau2_p = c.alpha > 0.0 ? tau2_perceptron(c.alpha, u) : 0.0;
  {
    auto os = csv::open_output(ctx.out_dir, "constants.csv");
    csv::Writer w(os, {"beta", "h", "q", "beta0", "nu2", "tau2", "alpha", "q_m", "r_m", "tau2_perceptron"});
    w.row(c.beta, c.h, fp.q, b0.value, v.nu2, v.tau2, c.alpha, pf.q, pf.r, tau2_p);
  }
  {
    auto os = csv::open_output(ctx.out_dir, "perceptron_table.csv");
    csv::Writer w(os, {"alpha", "q_m", "r_m", "E_xi", "Q", "Phi"});
    constexpr int rows = 8;
    for (int k = 0; k <= rows; ++k) {
      const double a = c.alpha * k / rows;
      const PerceptronFixedPoint p = solve_perceptron_fp(a, u);
      const XiStatistics xi = xi_moments(a, u);
      w.row(a, p.q, p.r, xi.mean, xi.variance, phi_alpha(a, u));
    }
  }
  kv(ctx.out, "q", fp.q);
  kv(ctx.out, "beta0", b0.value);
  kv(ctx.out, "nu2", v.nu2);
  kv(ctx.out, "tau2", v.tau2);
  kv(ctx.out, "q_m", pf.q);
  kv(ctx.out, "r_m", pf.r);
  kv(ctx.out, "tau2_perceptron", tau2_p);
}

inline void cmd_solve_q(const Context& ctx) {
  const SkFixedPoint fp = solve_q_sk(ctx.cfg.beta, ctx.cfg.h);
  auto os = csv::open_output(ctx.out_dir, "solve_q.csv");
  csv::Writer w(os, {"beta", "h", "q", "residual", "iterations"});
  w.row(ctx.cfg.beta, ctx.cfg.h, fp.q, fp.residual, fp.iterations);
  kv(ctx.out, "q", fp.q);
  kv(ctx.out, "residual", fp.residual);
  kv(ctx.out, "iterations", fp.iterations);
}

inline void cmd_beta0(const Context& ctx) {
  const Beta0 b = beta0();
  auto os = csv::open_output(ctx.out_dir, "beta0.csv");
  csv::Writer w(os, {"beta0", "residual"});
  w.row(b.value, b.residual);
  kv(ctx.out, "beta0", b.value);
  kv(ctx.out, "residual", b.residual);
}

inline void cmd_perceptron_fp(const Context& ctx) {
  const PerceptronFixedPoint p = solve_perceptron_fp(ctx.cfg.alpha, ctx.cfg.potential());
  auto os = csv::open_output(ctx.out_dir, "perceptron_fp.csv");
  csv::Writer w(os, {"alpha", "q_m", "r_m", "residual_q", "residual_r", "iterations"});
  w.row(p.alpha, p.q, p.r, p.residual_q, p.residual_r, p.iterations);
  kv(ctx.out, "q_m", p.q);
  kv(ctx.out, "r_m", p.r);
  kv(ctx.out, "residual_q", p.residual_q);
  kv(ctx.out, "residual_r", p.residual_r);
}

inline void cmd_sk_exact(const Context& ctx) {
  const SkParams p = sk_params(ctx.cfg);
  p.validate();
  check_enumerable(p.n, kEnumerationCap);
  NormalStream normal(sample_seed(ctx.cfg.seed, 0));
  const SkDisorder dis = SkDisorder::sample(p.n, normal);
  const double q = solve_q_sk(p.beta, p.h).q;
  const GibbsTables t = gibbs_single_site_expectations(dis, p);
  const PartitionValue z{t.log_z};
  const OverlapMoments om = overlap_moments(t, q);
  {
    auto os = csv::open_output(ctx.out_dir, "sk_disorder.csv");
    dis.write_csv(os);
  }
  auto os = csv::open_output(ctx.out_dir, "sk_exact.csv");
  csv::Writer w(os, {"n", "beta", "h", "log_z", "mantissa10", "exponent10", "q", "rho_R", "rho_R2", "rho_centered"});
  w.row(p.n, p.beta, p.h, z.log_z, z.mantissa10(), z.exponent10(), q, om.r1, om.r2, om.centered);
  kv(ctx.out, "log_z", z.log_z);
  kv(ctx.out, "rho_R", om.r1);
  kv(ctx.out, "rho_R2", om.r2);
  kv(ctx.out, "rho_centered", om.centered);
}

inline void cmd_perceptron_exact(const Context& ctx) {
  const auto& c = ctx.cfg;
  check_enumerable(c.n, kEnumerationCap);
  const int m = required_patterns(c);
  const BoundedU u = c.potential();
  NormalStream normal(sample_seed(c.seed, 0));
  const PerceptronDisorder dis = PerceptronDisorder::sample(c.n, m, normal);
  const double log_z = perceptron_partition_exact(dis, u, m);
  const double phi = phi_m(c.n, m, u);
  {
    auto os = csv::open_output(ctx.out_dir, "perceptron_disorder.csv");
    dis.write_csv(os);
  }
  auto os = csv::open_output(ctx.out_dir, "perceptron_exact.csv");
  csv::Writer w(os, {"n", "alpha", "m", "log_z", "Phi", "fluctuation"});
  const double fl = std::sqrt(static_cast<double>(c.n)) * (log_z / c.n - phi);
  w.row(c.n, c.alpha, m, log_z, phi, fl);
  kv(ctx.out, "m", m);
  kv(ctx.out, "log_z", log_z);
  kv(ctx.out, "Phi", phi);
}

inline void cmd_sde_check(const Context& ctx) {
  const auto& c = ctx.cfg;
  const SkParams p = sk_params(c);
  p.validate();
  require(c.steps % 4 == 0, "steps must be a multiple of 4", "steps");
  const TimeGrid grid(c.steps);
  const double q = solve_q_sk(p.beta, p.h).q;
  const std::array<double, 3> times{0.25, 0.5, 0.75};
  const std::array<double, 2> heat_times{0.5, 1.0};
  const SpinConfig sigma = SpinConfig::all_up(p.n);

  // Per path: X_1 at `times`, realized QV, and the x^2 and x^4 Ito residuals.
  struct PathResult {
    std::array<double, 3> x{};
    double qv = 0.0;
    std::array<double, 2> r2{}, r4{};
  };
  std::vector<PathResult> res(static_cast<std::size_t>(c.samples));
  parallel_for(res.size(), c.threads, [&](std::size_t j) {
    const SkPath path = SkPath::sample(p.n, grid, derive_seed(c.seed, j, streams::path));
    PathResult& r = res[j];
    for (std::size_t a = 0; a < times.size(); ++a) r.x[a] = path.x(0, grid.index_of(times[a]));
    const std::vector<double> hp = hamiltonian_path(sigma, p, q, path);
    r.qv = realized_qv(hp);
    for (std::size_t a = 0; a < heat_times.size(); ++a) {
      const int end = grid.index_of(heat_times[a]);
      double i2 = 0.0, i4 = 0.0;
      for (int k = 0; k < end; ++k) {
        const double x0 = path.x(0, k), x1 = path.x(0, k + 1);
        i2 += grid.dt();  // lap x^2 = 2
        i4 += 0.5 * (12.0 * x0 * x0 + 12.0 * x1 * x1) * grid.dt() * 0.5;
      }
      const double e = path.x(0, 0), xt = path.x(0, end);
      r.r2[a] = xt * xt - e * e + i2;
      r.r4[a] = xt * xt * xt * xt - e * e * e * e + i4;
    }
  });

  auto column = [&](auto&& get) {
    std::vector<double> v(res.size());
    for (std::size_t j = 0; j < res.size(); ++j) v[j] = get(res[j]);
    return v;
  };
  auto os = csv::open_output(ctx.out_dir, "sde_check.csv");
  csv::Writer w(os, {"check", "t", "value", "target", "std_error"});
  for (std::size_t a = 0; a < times.size(); ++a) {
    const std::vector<double> x = column([&](const PathResult& r) { return r.x[a]; });
    std::vector<double> sq(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) sq[j] = x[j] * x[j];
    w.row("x_variance", times[a], stats::variance(x), 1.0 - times[a], stats::std_error(sq));
  }
  const std::vector<double> qv = column([](const PathResult& r) { return r.qv; });
  w.row("realized_qv", 1.0, stats::mean(qv), expected_qv(p, q, 1.0), stats::std_error(qv));
  for (std::size_t a = 0; a < heat_times.size(); ++a) {
    const std::vector<double> r2 = column([&](const PathResult& r) { return r.r2[a]; });
    const std::vector<double> r4 = column([&](const PathResult& r) { return r.r4[a]; });
    w.row("heat_x2", heat_times[a], stats::mean(r2), 0.0, stats::std_error(r2));
    w.row("heat_x4", heat_times[a], stats::mean(r4), 0.0, stats::std_error(r4));
  }
  kv(ctx.out, "paths", c.samples);
  kv(ctx.out, "realized_qv", stats::mean(qv));
  kv(ctx.out, "expected_qv", expected_qv(p, q, 1.0));

  // Dump of the first path.
  const SkPath path = SkPath::sample(p.n, grid, derive_seed(c.seed, 0, streams::path));
  const std::vector<double> hp = hamiltonian_path(sigma, p, q, path);
  auto dump = csv::open_output(ctx.out_dir, "sde_path.csv");
  dump << "t";
  for (int i = 0; i < p.n; ++i) dump << ",X" << (i + 1);
  dump << ",minus_H\n";
  for (int k = 0; k < grid.points(); ++k) {
    dump << csv::num(grid.t(k));
    for (int i = 0; i < p.n; ++i) dump << ',' << csv::num(path.x(i, k));
    dump << ',' << csv::num(hp[static_cast<std::size_t>(k)]) << '\n';
  }
}

inline void cmd_decompose(const Context& ctx) {
  const auto& c = ctx.cfg;
  const SkParams p = sk_params(c);
  const double q = solve_q_sk(p.beta, p.h).q;
  const SkPath path = SkPath::sample(p.n, TimeGrid(c.steps), derive_seed(c.seed, 0, streams::path));
  const std::vector<DecompositionRecord> rec = decompose_y(p, q, path);
  auto os = csv::open_output(ctx.out_dir, "decomposition.csv");
  csv::Writer w(os, {"t", "U", "M1", "M2", "V1", "V2", "V3", "Y", "residual"});
  for (const auto& r : rec) w.row(r.t, r.u, r.m1, r.m2, r.v1, r.v2, r.v3, r.y, r.residual);
  kv(ctx.out, "Y", rec.back().y);
  kv(ctx.out, "residual", rec.back().residual);
}

inline void cmd_sk_clt(const Context& ctx) {
  const FluctuationRecord r = sk_clt(ctx);
  write_samples(ctx, "sk_clt_samples.csv", r);
  auto os = csv::open_output(ctx.out_dir, "sk_clt_summary.csv");
  csv::Writer w(os, {"n", "beta", "h", "n_samples", "mean", "var", "ci_lo", "ci_hi", "tau2_analytic", "ks_distance"});
  w.row(ctx.cfg.n, ctx.cfg.beta, ctx.cfg.h, ctx.cfg.samples, r.mean, r.variance, r.variance_ci.lo, r.variance_ci.hi,
        r.tau2, r.ks_distance);
  print_record(ctx, r);
}

inline void cmd_overlap_conc(const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::vector<OverlapRow> rows = run_overlap_concentration(ctx.n_list, c.beta, c.h, c.samples, c.seed, c.threads);
  auto os = csv::open_output(ctx.out_dir, "overlap_conc.csv");
  csv::Writer w(os, {"n", "beta", "h", "n_samples", "rho_centered", "std_error", "n_rho_centered"});
  for (const auto& r : rows) {
    w.row(r.n, c.beta, c.h, c.samples, r.mean_centered, r.std_error, r.scaled);
    kv(ctx.out, "n" + std::to_string(r.n) + ".n_rho_centered", r.scaled);
  }
}

inline void cmd_perceptron_clt(const Context& ctx) {
  ExperimentConfig c = ctx.cfg;
  c.model = ModelTag::perceptron;
  required_patterns(c);
  const FluctuationRecord r = run_perceptron_clt(c);
  write_samples(ctx, "perceptron_clt_samples.csv", r);
  auto os = csv::open_output(ctx.out_dir, "perceptron_clt_summary.csv");
  csv::Writer w(os, {"n", "alpha", "n_samples", "mean", "var", "ci_lo", "ci_hi", "tau2_analytic", "ks_distance"});
  w.row(c.n, c.alpha, c.samples, r.mean, r.variance, r.variance_ci.lo, r.variance_ci.hi, r.tau2, r.ks_distance);
  print_record(ctx, r);
}

inline void cmd_telescope(const Context& ctx) {
  const auto& c = ctx.cfg;
  check_enumerable(c.n, kEnumerationCap);
  const int m = required_patterns(c);
  NormalStream normal(sample_seed(c.seed, 0));
  const PerceptronDisorder dis = PerceptronDisorder::sample(c.n, m, normal);
  const TelescopingReport r = telescoping_check(dis, c.potential(), m);
  auto os = csv::open_output(ctx.out_dir, "telescope.csv");
  csv::Writer w(os, {"m", "Y_m", "lhs", "residual"});
  for (std::size_t k = 0; k < r.y.size(); ++k) w.row(static_cast<int>(k + 1), r.y[k], r.lhs[k], r.residual[k]);
  kv(ctx.out, "max_residual", r.max_residual);
}

inline void cmd_cf_check(const Context& ctx) {
  const FluctuationRecord r = sk_clt(ctx);
  const std::vector<CfRow> rows = empirical_cf(r.values, cf_grid(r.tau2), r.tau2);
  auto os = csv::open_output(ctx.out_dir, "cf.csv");
  csv::Writer w(os, {"u", "re", "im", "target", "abs_diff"});
  double sup = 0.0;
  for (const auto& row : rows) {
    w.row(row.u, row.empirical.real(), row.empirical.imag(), row.target, row.distance());
    sup = std::max(sup, row.distance());
  }
  kv(ctx.out, "tau2", r.tau2);
  kv(ctx.out, "sup_abs_diff", sup);
}

inline ExperimentConfig with(std::function<void(ExperimentConfig&)> f) {
  ExperimentConfig c;
  f(c);
  return c;
}

}  // namespace detail

inline std::vector<Command> commands() {
  using namespace detail;
  const unsigned sk = kN | kBeta | kH;
  const unsigned perc = kN | kAlpha | kUScale;
  return {
      {"constants", "Replica-symmetric constants for both models", kBeta | kH | kAlpha | kUScale,
       with([](ExperimentConfig&) {}), cmd_constants},
      {"solve-q", "Solve the SK fixed point q", kBeta | kH, with([](ExperimentConfig&) {}), cmd_solve_q},
      {"beta0", "High-temperature threshold beta0", 0, with([](ExperimentConfig&) {}), cmd_beta0},
      {"perceptron-fp", "Solve the perceptron fixed point (q_m, r_m)", kAlpha | kUScale,
       with([](ExperimentConfig& c) { c.alpha = 0.05; }), cmd_perceptron_fp},
      {"sk-exact", "Exact SK partition function and overlap moments for one disorder draw", sk | kSeed,
       with([](ExperimentConfig& c) { c.n = 10; }), cmd_sk_exact},
      {"perceptron-exact", "Exact perceptron partition function for one disorder draw", perc | kSeed,
       with([](ExperimentConfig& c) {
         c.n = 8;
         c.alpha = 0.25;
       }),
       cmd_perceptron_exact},
      {"sde-check", "Reversed Brownian motion law, quadratic variation and Ito residuals",
       sk | kSamples | kSeed | kSteps, with([](ExperimentConfig& c) {
         c.n = 8;
         c.samples = 2000;
         c.steps = 1024;
       }),
       cmd_sde_check},
      {"decompose", "Fluctuation decomposition along one interpolation path", sk | kSeed | kSteps,
       with([](ExperimentConfig& c) {
         c.n = 8;
         c.steps = 1024;
       }),
       cmd_decompose},
      {"sk-clt", "SK free-energy fluctuations over disorder", sk | kSamples | kSeed, with([](ExperimentConfig&) {}),
       cmd_sk_clt},
      {"overlap-conc", "N times the mean centered squared overlap", sk | kSamples | kSeed,
       with([](ExperimentConfig& c) { c.samples = 500; }), cmd_overlap_conc, {8, 12, 16, 20}},
      {"perceptron-clt", "Perceptron free-energy fluctuations over disorder", perc | kSamples | kSeed,
       with([](ExperimentConfig& c) { c.n = 16; }), cmd_perceptron_clt},
      {"telescope", "Per-pattern telescoping of the perceptron free energy", perc | kSeed,
       with([](ExperimentConfig& c) {
         c.n = 12;
         c.alpha = 0.25;
       }),
       cmd_telescope},
      {"cf-check", "Empirical characteristic function of the SK fluctuations", sk | kSamples | kSeed,
       with([](ExperimentConfig&) {}), cmd_cf_check},
  };
}

namespace detail {

inline std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '"', '\'');
  return s;
}

inline void report(std::ostream& err, const std::string& kind, const std::string& key, const std::string& msg) {
  err << "error kind=" << kind << " key=" << (key.empty() ? "-" : key) << " message=\"" << one_line(msg) << "\"\n";
}

/// Flag storage for one subcommand; values start at the subcommand defaults
/// so that --help shows them.
struct Bound {
  const Command* cmd = nullptr;
  CLI::App* app = nullptr;
  ExperimentConfig cfg;
  std::vector<int> n_list;
  std::string out_dir = kDefaultOutDir;
  std::string config;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

inline void add_flags(Bound& b) {
  CLI::App& a = *b.app;
  const unsigned f = b.cmd->flags;
  if (f & kN) {
    if (b.cmd->n_list_default.empty())
      b.opts["n"] = a.add_option("--n", b.cfg.n, "Number of sites");
    else
      b.opts["n"] = a.add_option("--n", b.n_list, "Comma-separated site counts")->delimiter(',');
  }
  if (f & kBeta) b.opts["beta"] = a.add_option("--beta", b.cfg.beta, "Inverse temperature");
  if (f & kH) b.opts["h"] = a.add_option("--h", b.cfg.h, "External field");
  if (f & kAlpha) b.opts["alpha"] = a.add_option("--alpha", b.cfg.alpha, "Pattern ratio M/N");
  if (f & kUScale) b.opts["u-scale"] = a.add_option("--u-scale", b.cfg.u_scale, "Scale a of u(x) = a tanh(x)");
  if (f & kSamples) b.opts["samples"] = a.add_option("--samples", b.cfg.samples, "Number of disorder samples or paths");
  if (f & kSeed)
    b.opts["seed"] = a.add_option("--seed", b.cfg.seed, "Master seed (falls back to SPINPATH_SEED, then the default)");
  if (f & kSteps) b.opts["steps"] = a.add_option("--steps", b.cfg.steps, "Time steps on [0, 1]");
  b.opts["threads"] = a.add_option("--threads", b.cfg.threads, "Worker threads, 0 = all cores");
  b.opts["config"] = a.add_option("--config", b.config, "Config file of key = value lines");
  b.opts["out-dir"] = a.add_option("--out-dir", b.out_dir, "Directory for CSV output (created if absent)");
}

inline std::uint64_t env_seed() {
  const char* s = std::getenv("SPINPATH_SEED");
  if (s == nullptr) return 0;
  return ::spinpath::detail::parse_seed(s, "SPINPATH_SEED");
}

/// Precedence: flags over config file over SPINPATH_SEED over defaults.
inline Context resolve(const Bound& b, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = b.cmd->defaults;
  std::vector<int> n_list = b.cmd->n_list_default;
  std::string out_dir = kDefaultOutDir;
  if ((b.cmd->flags & kSeed) && std::getenv("SPINPATH_SEED") != nullptr) cfg.seed = env_seed();
  if (!b.config.empty()) {
    const ConfigOverrides o = read_config(b.config);
    for (const auto& w : o.warnings) err << "warning: " << w << '\n';
    o.apply_to(cfg);
    if (o.n && !n_list.empty()) n_list = {*o.n};
    if (o.out_dir) out_dir = *o.out_dir;
  }
  auto take = [&](const char* name, auto& dst, const auto& src) {
    if (b.given(name)) dst = src;
  };
  take("n", cfg.n, b.cfg.n);
  if (!b.cmd->n_list_default.empty()) take("n", n_list, b.n_list);
  take("beta", cfg.beta, b.cfg.beta);
  take("h", cfg.h, b.cfg.h);
  take("alpha", cfg.alpha, b.cfg.alpha);
  take("u-scale", cfg.u_scale, b.cfg.u_scale);
  take("samples", cfg.samples, b.cfg.samples);
  take("seed", cfg.seed, b.cfg.seed);
  take("steps", cfg.steps, b.cfg.steps);
  take("threads", cfg.threads, b.cfg.threads);
  take("out-dir", out_dir, b.out_dir);
  cfg.validate();
  for (int n : n_list) require(n >= 1 && n <= kEnumerationCap, "n must lie in [1, 24]", "n");
  return {cfg, n_list, out_dir, out, err};
}

}  // namespace detail

/// Runs the CLI. Exit codes: 0 success, 1 invalid input, 2 numerical failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace detail;
  const std::vector<Command> cmds = commands();
  CLI::App app{"Exact and Monte Carlo numerics for the SK and perceptron models along stochastic interpolation paths",
               "spinpath"};
  // -h is not a help alias: --h is the external field.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::vector<std::unique_ptr<Bound>> bound;
  for (const Command& c : cmds) {
    auto b = std::make_unique<Bound>();
    b->cmd = &c;
    b->cfg = c.defaults;
    b->n_list = c.n_list_default;
    b->app = app.add_subcommand(c.name, c.help);
    b->app->set_help_flag("--help", "Print this help message and exit");
    add_flags(*b);
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report(err, "usage", "", e.what());
    return 1;
  }

  try {
    for (const auto& b : bound) {
      if (!b->app->parsed()) continue;
      const Context ctx = resolve(*b, out, err);
      b->cmd->run(ctx);
      return 0;
    }
    report(err, "usage", "", "no subcommand given");
    return 1;
  } catch (const ValidationError& e) {
    report(err, "validation", e.key(), e.what());
    return 1;
  } catch (const NumericalError& e) {
    report(err, "numerical", "", e.what());
    return 2;
  } catch (const std::exception& e) {
    report(err, "io", "", e.what());
    return 1;
  }
}

}  // namespace spinpath::cli
