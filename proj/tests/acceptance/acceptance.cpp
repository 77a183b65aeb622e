#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dropreg/dropout.hpp"
#include "dropreg/duality.hpp"
#include "dropreg/penalty.hpp"
#include "dropreg/regularizer.hpp"
#include "dropreg/solvers.hpp"
#include "dropreg/special.hpp"
#include "harness/harness.hpp"
#include "support/oracles.hpp"

namespace {

using dropreg::MethodSpec;
using dropreg::PenaltySpec;
using dropreg::ScalarFn;
using dropreg::SolverConfig;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

bool identical(const dropreg::Trace& a, const dropreg::Trace& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (!(ra.w.array() == rb.w.array()).all()) return false;
    if (ra.eta.size() != rb.eta.size() || !(ra.eta.array() == rb.eta.array()).all()) return false;
  }
  return (a.w_final.array() == b.w_final.array()).all();
}

Outcome dual_pairs() {
  const auto grid = dropreg::log_grid(1e-3, 10.0, 64);
  double worst_omega = 0.0;
  double worst_argmin = 0.0;
  bool ok = true;
  for (const PenaltySpec& spec : {PenaltySpec::l1(), PenaltySpec::lp(0.5), PenaltySpec::lp_pow(0.5),
                                  PenaltySpec::l0(), PenaltySpec::elastic_net(0.5), PenaltySpec::huber(1.0),
                                  PenaltySpec::log_sum(2.0), PenaltySpec::scad(3.0, 1.0),
                                  PenaltySpec::mcp(3.0, 1.0)}) {
    dropreg::DualCheckOptions opts;
    opts.omega_tol = 1e-6;
    opts.argmin_tol = 1e-4;
    const auto r = dropreg::check_dual_pair(spec, grid, opts);
    ok = ok && r.passed;
    worst_omega = std::max(worst_omega, r.max_omega_dev);
    worst_argmin = std::max(worst_argmin, r.max_argmin_rel_dev);
  }
  return {ok, "9 penalties, max |dOmega| " + fmt("%.2e", worst_omega) + ", max argmin rel err " +
                  fmt("%.2e", worst_argmin)};
}

Outcome subquadraticity() {
  std::vector<double> u_grid;
  for (double w : dropreg::log_grid(1e-3, 10.0, 96)) u_grid.push_back(w * w);
  std::vector<std::pair<std::string, std::function<double(double)>>> fns;
  for (const PenaltySpec& spec : {PenaltySpec::l1(), PenaltySpec::lp(0.5), PenaltySpec::lp_pow(0.5),
                                  PenaltySpec::lp_pow(1.5), PenaltySpec::l0(), PenaltySpec::elastic_net(0.5),
                                  PenaltySpec::huber(1.0), PenaltySpec::log_sum(2.0),
                                  PenaltySpec::scad(3.0, 1.0), PenaltySpec::mcp(3.0, 1.0),
                                  PenaltySpec::hard_thresh(2)}) {
    fns.emplace_back(spec.to_string(), [spec](double w) { return spec.omega_scalar(w); });
  }
  std::vector<std::shared_ptr<dropreg::EffectivePenalty>> keep;
  for (const MethodSpec& m : {MethodSpec::standout(1.0, 1.0), MethodSpec::vardrop(1.0),
                              MethodSpec::hard_concrete(1.0)}) {
    auto ep = std::make_shared<dropreg::EffectivePenalty>(m);
    keep.push_back(ep);
    fns.emplace_back(m.to_string(), [ep](double w) { return (*ep)(w); });
  }
  bool ok = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, fn] : fns) {
    const auto r = dropreg::subquadratic_check(ScalarFn(name, {0.0, kInf}, fn), u_grid, 1e-8);
    ok = ok && r.ok;
    if (r.worst_violation > worst || worst_name.empty()) {
      worst = r.worst_violation;
      worst_name = name;
    }
  }
  return {ok, std::to_string(fns.size()) + " penalties, worst second difference " + fmt("%.2e", worst) +
                  " (" + worst_name + ")"};
}

Outcome monte_carlo_tikhonov() {
  int within = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto p = oracle::random_problem(200, 10, 1000 + seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.3, 0.95);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd alpha(10);
    Eigen::VectorXd w(10);
    std::vector<dropreg::MaskModel> masks;
    for (int j = 0; j < 10; ++j) {
      alpha[j] = unif(rng);
      w[j] = normal(rng);
      masks.push_back(dropreg::MaskModel::gaussian(alpha[j]));
    }
    const double closed = dropreg::expected_loss_closed_form(p.X, p.y, w, alpha);
    const auto mc = dropreg::expected_loss_monte_carlo(p.X, p.y, w, masks, 100000, 500 + seed);
    const double z = std::abs(mc.mean - closed) / mc.std_error;
    worst = std::max(worst, z);
    if (z <= 3.0) ++within;
  }
  return {within >= 19, std::to_string(within) + "/20 within 3 SE, worst |z| " + fmt("%.2f", worst)};
}

Outcome dawson_accuracy() {
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double u = 10.0 * i / 199.0;
    worst = std::max(worst, std::abs(dropreg::dawson(u) - oracle::dawson(u)));
  }
  double residual = 0.0;
  const double h = 1e-5;
  for (int i = 0; i <= 500; ++i) {
    const double u = 5.0 * i / 500.0;
    const double d = (dropreg::dawson(u + h) - dropreg::dawson(u - h)) / (2 * h);
    residual = std::max(residual, std::abs(d + 2 * u * dropreg::dawson(u) - 1.0));
  }
  return {worst <= 1e-10 && residual <= 1e-6,
          "max |F - oracle| " + fmt("%.2e", worst) + ", max ODE residual " + fmt("%.2e", residual)};
}

Outcome mcp_bernoulli() {
  const PenaltySpec mcp = PenaltySpec::mcp(1.0, 1.0);
  double worst = 0.0;
  const auto grid = dropreg::log_grid(1e-6, 1e6, 999);
  std::vector<double> etas{0.0};
  etas.insert(etas.end(), grid.begin(), grid.end());
  for (double e : etas) {
    worst = std::max(worst, std::abs(mcp.f_scalar(e) - dropreg::biased_bernoulli_f(e, 1.0)));
  }
  return {worst <= 1e-12, std::to_string(etas.size()) + " points, max diff " + fmt("%.2e", worst)};
}

Outcome standout() {
  double worst = 0.0;
  for (int i = 0; i <= 160; ++i) {
    const double z = 8.0 * i / 160.0;
    const ScalarFn eh("standout", {0.0, kInf}, [](double s) { return std::exp(s); });
    const double quad = dropreg::omega_from_eta_hat(eh, z, 0.0, 0.0);
    worst = std::max(worst, std::abs(quad - dropreg::standout_omega_scalar(z, 1.0, 1.0)));
  }
  std::size_t mismatches = 0;
  double max_ulps = 0.0;
  for (int i = 0; i <= 160; ++i) {
    const double z = 8.0 * i / 160.0;
    for (double w2 : {0.5, 1.0, 3.0}) {
      const double ref = 1.0 * dropreg::standout_omega_scalar(z, w2, 1.0);
      for (double lambda : {0.1, 10.0}) {
        const double scaled = lambda * dropreg::standout_omega_scalar(z, w2, lambda);
        if (scaled != ref) {
          ++mismatches;
          const double ulp = std::nextafter(ref, kInf) - ref;
          max_ulps = std::max(max_ulps, std::abs(scaled - ref) / ulp);
        }
      }
    }
  }
  return {worst <= 1e-8 && mismatches == 0, "max |closed - quadrature| " + fmt("%.2e", worst) +
                                                ", lambda-scaling mismatches " + std::to_string(mismatches) +
                                                " (max " + fmt("%.0f", max_ulps) + " ulp)"};
}

Outcome prox_iht() {
  int identical_runs = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const auto p = oracle::random_problem(50, 100, 2000 + seed, 0.1, 10);
    SolverConfig cfg;
    cfg.lambda = 1.0;
    cfg.step = 0.1;
    cfg.iters = 100;
    const auto a = dropreg::ada_prox(p, PenaltySpec::hard_thresh(10), cfg);
    const auto b = dropreg::iht(p, 10, cfg);
    bool same = a.records.size() == b.records.size() && (a.w_final.array() == b.w_final.array()).all();
    for (std::size_t i = 0; same && i < a.records.size(); ++i) {
      same = (a.records[i].w.array() == b.records[i].w.array()).all();
    }
    if (same) ++identical_runs;
  }
  return {identical_runs == 50, std::to_string(identical_runs) + "/50 bit-identical iterate sequences"};
}

constexpr double kRecoveryLambda = 1e-4;

Outcome sparse_recovery() {
  int exact = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto data = dropreg::harness::gen_synthetic(80, 128, 5, 0.0, 3000 + seed);
    SolverConfig cfg;
    cfg.lambda = kRecoveryLambda;
    cfg.iters = 200;
    cfg.log_every = 200;
    const auto t = dropreg::irls(data.problem, PenaltySpec::l1(), cfg);
    if (dropreg::solution_metrics(t, data.w_true, cfg.zero_tol).exact_support) ++exact;
  }
  return {exact >= 18, std::to_string(exact) + "/20 exact supports at lambda " + fmt("%g", kRecoveryLambda)};
}

Outcome irls_monotone() {
  int violations = 0;
  double worst = -kInf;
  for (const PenaltySpec& spec : {PenaltySpec::l1(), PenaltySpec::log_sum(1.0), PenaltySpec::mcp(3.0, 1.0)}) {
    for (int seed = 0; seed < 10; ++seed) {
      const auto data = dropreg::harness::gen_synthetic(80, 40, 5, 0.1, 4000 + seed);
      SolverConfig cfg;
      cfg.lambda = 0.05;
      cfg.iters = 50;
      const auto t = dropreg::irls(data.problem, spec, cfg);
      for (std::size_t i = 1; i < t.records.size(); ++i) {
        const double inc = t.records[i].objective - t.records[i - 1].objective;
        worst = std::max(worst, inc);
        if (inc > 1e-12) ++violations;
      }
    }
  }
  return {violations == 0, "30 runs, " + std::to_string(violations) + " increases, largest step change " +
                               fmt("%.2e", worst)};
}

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  status = pclose(pipe);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

constexpr double kShapeTolerance = 0.25;

Outcome figure_one() {
  const std::string tool = DROPREG_TOOL_PATH;
  const std::string golden = DROPREG_GOLDEN_DIR;
  const std::string left_cmd = tool +
                               " penalty-curve l1 logsum:eps=2,scale=2 mcp:a=3,lambda=1 vardrop:lambda=1"
                               " hardconcrete:lambda=1 l0:scale=0.5 --grid 0:5:0.01";
  const std::string right_cmd = tool +
                                " sparse-curve l1 l0 hardthresh:k=8 logsum:eps=2,scale=2 mcp:a=3,lambda=1"
                                " vardrop:lambda=1 hardconcrete:lambda=1 --d 32";
  int s1 = 0;
  int s2 = 0;
  const std::string left = run_capture(left_cmd, s1);
  const std::string right = run_capture(right_cmd, s2);
  const bool same_left = s1 == 0 && left == slurp(golden + "/penalty_curve.csv");
  const bool same_right = s2 == 0 && right == slurp(golden + "/sparse_curve.csv");

  std::vector<std::vector<double>> cols;
  std::vector<std::string> header;
  std::istringstream ss(left);
  for (std::string line; std::getline(ss, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_row(line);
    if (header.empty()) {
      header = cells;
      cols.resize(cells.size());
      continue;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) cols[i].push_back(std::stod(cells[i]));
  }
  bool monotone = !cols.empty();
  for (std::size_t c = 1; c < cols.size(); ++c) {
    for (std::size_t i = 1; i < cols[c].size(); ++i) monotone = monotone && cols[c][i] >= cols[c][i - 1];
  }
  double sup = kInf;
  if (cols.size() >= 5) {
    const auto& w = cols[0];
    const auto& logsum = cols[2];
    const auto& vardrop = cols[4];
    const std::size_t last = w.size() - 1;
    sup = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double a = vardrop[i] - vardrop[last];
      const double b = logsum[i] - logsum[last];
      sup = std::max(sup, std::abs(a - b));
    }
  }
  const bool ok = same_left && same_right && monotone && sup <= kShapeTolerance;
  return {ok, std::string("penalty-curve ") + (same_left ? "identical" : "DIFFERS") + ", sparse-curve " +
                  (same_right ? "identical" : "DIFFERS") + ", monotone " + (monotone ? "yes" : "no") +
                  ", VarDrop vs LogSum sup distance " + fmt("%.4f", sup) + " (tolerance " +
                  fmt("%.2f", kShapeTolerance) + ")"};
}

Outcome degenerate_masks() {
  int identical_runs = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto p = oracle::random_problem(60, 30, 5000 + seed, 0.1, 6);
    SolverConfig cfg;
    cfg.lambda = 0.05;
    cfg.step = 0.2;
    cfg.iters = 100;
    cfg.init_sigma = 1.0;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const dropreg::Regularizer reg(seed % 2 == 0 ? PenaltySpec::log_sum(1.0) : PenaltySpec::hard_thresh(6));
    if (identical(dropreg::additive_reparam_prox(p, reg, cfg), dropreg::ada_prox(p, reg, cfg))) {
      ++identical_runs;
    }
  }
  return {identical_runs == 20, std::to_string(identical_runs) + "/20 bit-identical traces"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "dual pairs", 10.0, dual_pairs},
      {"AC2", "subquadraticity", 30.0, subquadraticity},
      {"AC3", "dropout Tikhonov Monte Carlo", 60.0, monte_carlo_tikhonov},
      {"AC4", "Dawson accuracy", 5.0, dawson_accuracy},
      {"AC5", "MCP(1,1) equals biased Bernoulli f", 1.0, mcp_bernoulli},
      {"AC6", "Standout closed form and lambda invariance", 5.0, standout},
      {"AC7", "ada_prox with HardThresh equals iht", 30.0, prox_iht},
      {"AC8", "IRLS-l1 sparse recovery", 60.0, sparse_recovery},
      {"AC9", "IRLS objective monotone", 30.0, irls_monotone},
      {"AC10", "curve regeneration and shape", 60.0, figure_one},
      {"AC11", "unit masks reduce additive to ada_prox", 10.0, degenerate_masks},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %s %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.budget_seconds);
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
