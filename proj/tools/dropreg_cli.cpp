#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dropreg/error.hpp"
#include "dropreg/regularizer.hpp"
#include "harness/harness.hpp"

namespace h = dropreg::harness;

namespace {

struct Common {
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
  std::string grid;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_grid) {
  c.grid = default_grid;
  sub->add_option("--lambda", c.lambda, "Regularization weight");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out", c.out, "Output path (default: stdout)");
  sub->add_option("--config", c.config, "Flat key=value file; flags given on the command line win");
  sub->add_option("--grid", c.grid, "Grid lo:hi:step");
}

// Every option of the subcommand except output plumbing, in declaration order.
h::ConfigEcho echo_config(const CLI::App* sub) {
  h::ConfigEcho echo;
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt == sub->get_help_ptr()) continue;
    const std::string key = opt->get_single_name();
    if (key == "out" || key == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      if (opt->get_items_expected_max() > 1) {
        for (const std::string& r : opt->results()) value += (value.empty() ? "" : " ") + r;
      } else {
        value = opt->results().back();
      }
    } else {
      value = opt->get_default_str();
      if (value == "{}") value.clear();
    }
    echo.emplace_back(key, value);
  }
  return echo;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw h::UsageError("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Splices "--key=value" tokens from a --config file in front of the user's
// own arguments, so that explicit flags take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  std::ifstream in(path);
  if (!in) throw h::UsageError("cannot open config '" + path + "'");
  std::vector<std::string> flags;
  std::vector<std::string> positionals;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw h::UsageError("config line without '=': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "items") {
      std::istringstream ss(value);
      for (std::string tok; ss >> tok;) positionals.push_back(tok);
    } else if (key != "config") {
      flags.push_back("--" + key + "=" + value);
    }
  }
  bool user_positionals = false;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i].rfind("-", 0) != 0 && args[i - 1].rfind("--", 0) != 0) user_positionals = true;
  }
  args.insert(args.begin() + 2, flags.begin(), flags.end());
  if (!user_positionals) args.insert(args.end(), positionals.begin(), positionals.end());
  return args;
}

std::vector<h::CurveItem> curve_items(const std::vector<std::string>& texts, double lambda) {
  std::vector<h::CurveItem> items;
  for (const std::string& t : texts) items.push_back(h::parse_curve_item(t, lambda));
  return items;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dropout as penalized regression: curves, duality checks and solvers", "dropreg"};
  app.set_version_flag("--version", std::string(h::kVersion));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  Common c_pc, c_sc, c_dc, c_sv, c_dv, c_gd;
  std::vector<std::string> items;

  auto* pc = app.add_subcommand("penalty-curve", "Omega(|w|) over a grid for separable penalties and methods");
  add_common(pc, c_pc, "0:5:0.01");
  pc->add_option("items", items, "Penalties (l1, logsum:eps=2, ...) or methods (vardrop, hardconcrete, standout); append scale=c to multiply");

  int sc_d = 32;
  auto* sc = app.add_subcommand("sparse-curve", "Omega of unit-norm k-sparse vectors, k = 1..d");
  add_common(sc, c_sc, "");
  sc->add_option("items", items, "Penalties or methods");
  sc->add_option("--d", sc_d, "Dimension")->check(CLI::PositiveNumber);

  int dc_points = 64;
  double dc_lo = 1e-3;
  double dc_hi = 10.0;
  dropreg::DualCheckOptions dc_opts;
  auto* dc = app.add_subcommand("duality-check", "Check each penalty against its dual form");
  add_common(dc, c_dc, "");
  dc->add_option("items", items, "Penalties to check (default: the whole zoo)");
  dc->add_option("--points", dc_points, "Log-grid points in |w|")->check(CLI::PositiveNumber);
  dc->add_option("--w-lo", dc_lo, "Smallest |w|")->check(CLI::PositiveNumber);
  dc->add_option("--w-hi", dc_hi, "Largest |w|")->check(CLI::PositiveNumber);
  dc->add_option("--omega-tol", dc_opts.omega_tol, "Tolerance on |Omega - min over eta|");
  dc->add_option("--argmin-tol", dc_opts.argmin_tol, "Relative tolerance on the minimizing eta");
  dc->add_option("--perturb-f", dc_opts.f_shift, "Constant added to f (negative control)");
  dc->add_option("--dim", dc_opts.dim, "Dimension for non-separable penalties");

  std::string sv_synth;
  std::string sv_data;
  std::string sv_solver;
  std::string sv_penalty;
  std::size_t sv_k = 0;
  std::string sv_mask;
  std::string sv_schedule = "constant";
  bool sv_timing = false;
  dropreg::SolverConfig sv_cfg;
  auto* sv = app.add_subcommand("solve", "Run a solver and write its trace");
  add_common(sv, c_sv, "");
  sv->add_option("--synthetic", sv_synth, "Synthetic problem n=..,d=..,k=..[,noise=..]");
  sv->add_option("--data", sv_data, "CSV prefix: reads PREFIX_X.csv, PREFIX_y.csv and optional PREFIX_w.csv");
  sv->add_option("--solver", sv_solver, "Solver name")->required();
  sv->add_option("--penalty", sv_penalty, "Penalty or method spec");
  sv->add_option("--k", sv_k, "Sparsity level for iht (shorthand for --penalty hardthresh:k=K)");
  sv->add_option("--mask", sv_mask, "Mask family: binary, gaussian, bernoulli, hardconcrete");
  sv->add_option("--step", sv_cfg.step, "Step size");
  sv->add_option("--schedule", sv_schedule, "Step schedule: constant or linear");
  sv->add_option("--iters", sv_cfg.iters, "Iterations");
  sv->add_option("--log-every", sv_cfg.log_every, "Trace every n-th iteration (the last is always kept)");
  sv->add_option("--init-sigma", sv_cfg.init_sigma, "Standard deviation of the initial weights");
  sv->add_option("--rel-tol", sv_cfg.rel_tol, "Stop once the relative change in w falls below this");
  sv->add_option("--zero-tol", sv_cfg.zero_tol, "Threshold for counting a weight as nonzero");
  sv->add_flag("--timing", sv_timing, "Add a wall-clock seconds column");
  sv->get_option("--data")->excludes("--synthetic");

  int dv_n = 200;
  int dv_d = 10;
  std::string dv_mask = "gaussian";
  std::size_t dv_samples = 100000;
  double dv_lo = 0.5;
  double dv_hi = 0.9;
  double dv_alpha = 0.0;
  auto* dv = app.add_subcommand("dropout-verify", "Monte Carlo check of the expected dropout loss");
  add_common(dv, c_dv, "");
  dv->add_option("--n", dv_n, "Rows")->check(CLI::PositiveNumber);
  dv->add_option("--d", dv_d, "Columns")->check(CLI::PositiveNumber);
  dv->add_option("--mask", dv_mask, "Mask family: binary, gaussian, bernoulli");
  dv->add_option("--samples", dv_samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  dv->add_option("--alpha-lo", dv_lo, "Smallest keep parameter");
  dv->add_option("--alpha-hi", dv_hi, "Largest keep parameter");
  dv->add_option("--alpha", dv_alpha, "Use one keep parameter for every coordinate");

  h::SyntheticSpec gd;
  auto* gdc = app.add_subcommand("gen-data", "Write a synthetic problem as PREFIX_X.csv, PREFIX_y.csv, PREFIX_w.csv");
  add_common(gdc, c_gd, "");
  gdc->add_option("--n", gd.n, "Rows")->check(CLI::PositiveNumber);
  gdc->add_option("--d", gd.d, "Columns")->check(CLI::PositiveNumber);
  gdc->add_option("--k", gd.k, "Nonzeros in w_true")->check(CLI::NonNegativeNumber);
  gdc->add_option("--noise", gd.noise, "Noise standard deviation");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? h::kSuccess : h::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kUsage;
  }

  try {
    if (pc->parsed()) {
      if (items.empty()) throw h::UsageError("penalty-curve needs at least one penalty or method");
      const auto parsed = curve_items(items, c_pc.lambda);
      h::require_separable(parsed);
      const auto grid = h::parse_grid(c_pc.grid);
      Output out(c_pc.out);
      h::write_header(out.stream(), "penalty-curve", echo_config(pc));
      h::penalty_curve(out.stream(), parsed, grid);
      return h::kSuccess;
    }
    if (sc->parsed()) {
      const auto parsed = curve_items(items, c_sc.lambda);
      Output out(c_sc.out);
      h::write_header(out.stream(), "sparse-curve", echo_config(sc));
      h::sparse_curve(out.stream(), parsed, sc_d);
      return h::kSuccess;
    }
    if (dc->parsed()) {
      std::vector<dropreg::PenaltySpec> specs;
      for (const std::string& t : items) specs.push_back(dropreg::parse_penalty(t));
      if (specs.empty()) specs = h::default_duality_set();
      const std::vector<double> grid = c_dc.grid.empty()
                                           ? dropreg::log_grid(dc_lo, dc_hi, dc_points)
                                           : h::parse_grid(c_dc.grid);
      dc_opts.seed = c_dc.seed;
      Output out(c_dc.out);
      h::write_header(out.stream(), "duality-check", echo_config(dc));
      const bool ok = h::duality_report(out.stream(), specs, grid, dc_opts);
      if (!ok) std::cerr << "duality check failed\n";
      return ok ? h::kSuccess : h::kVerificationFailed;
    }
    if (sv->parsed()) {
      std::optional<Eigen::VectorXd> w_true;
      dropreg::Problem problem;
      if (!sv_synth.empty()) {
        const h::SyntheticSpec s = h::parse_synthetic(sv_synth);
        h::Synthetic data = h::gen_synthetic(s.n, s.d, s.k, s.noise, c_sv.seed);
        problem = std::move(data.problem);
        w_true = std::move(data.w_true);
      } else if (!sv_data.empty()) {
        const dropreg::Standardized st = dropreg::standardize(h::read_matrix_csv(sv_data + "_X.csv"));
        problem.X = st.X;
        const Eigen::MatrixXd y = h::read_matrix_csv(sv_data + "_y.csv");
        if (y.cols() != 1) throw h::UsageError("y must have one column");
        problem.y = y.col(0);
        if (std::filesystem::exists(sv_data + "_w.csv")) {
          w_true = Eigen::VectorXd(h::read_matrix_csv(sv_data + "_w.csv").col(0).cwiseProduct(st.scales));
        }
      } else {
        throw h::UsageError("solve needs --synthetic or --data");
      }
      std::string spec_text = sv_penalty;
      if (spec_text.empty() && sv_k > 0) spec_text = "hardthresh:k=" + std::to_string(sv_k);
      if (spec_text.empty()) throw h::UsageError("solve needs --penalty (or --k for iht)");
      const dropreg::Regularizer reg = dropreg::Regularizer::parse(spec_text);
      sv_cfg.lambda = c_sv.lambda;
      sv_cfg.seed = c_sv.seed;
      sv_cfg.schedule = dropreg::parse_step_schedule(sv_schedule);
      if (!sv_mask.empty()) sv_cfg.mask = dropreg::parse_mask_kind(sv_mask);
      const dropreg::Trace trace = dropreg::run_solver(sv_solver, problem, reg, sv_cfg);
      Output out(c_sv.out);
      h::write_header(out.stream(), "solve", echo_config(sv));
      h::write_trace(out.stream(), trace, sv_timing);
      h::write_metrics(out.stream(), dropreg::solution_metrics(trace, w_true, sv_cfg.zero_tol),
                       w_true.has_value());
      return h::kSuccess;
    }
    if (dv->parsed()) {
      if (dv_alpha != 0.0) dv_lo = dv_hi = dv_alpha;
      const auto r = h::dropout_verify(dv_n, dv_d, dropreg::parse_mask_kind(dv_mask), dv_samples,
                                       c_dv.seed, dv_lo, dv_hi);
      const bool ok = std::abs(r.z) <= 4.0;
      Output out(c_dv.out);
      h::write_header(out.stream(), "dropout-verify", echo_config(dv));
      out.stream() << "closed_form,mc_mean,std_error,samples,z,status\n"
                   << h::format_number(r.closed_form) << ',' << h::format_number(r.mc.mean) << ','
                   << h::format_number(r.mc.std_error) << ',' << r.mc.samples << ','
                   << h::format_number(r.z) << ',' << (ok ? "pass" : "FAIL") << '\n';
      return ok ? h::kSuccess : h::kVerificationFailed;
    }
    if (gdc->parsed()) {
      if (c_gd.out.empty()) throw h::UsageError("gen-data needs --out PREFIX");
      const h::Synthetic data = h::gen_synthetic(gd.n, gd.d, gd.k, gd.noise, c_gd.seed);
      const h::ConfigEcho echo = echo_config(gdc);
      const auto write = [&](const std::string& suffix, const Eigen::MatrixXd& m) {
        Output out(c_gd.out + suffix);
        h::write_header(out.stream(), "gen-data", echo);
        h::write_matrix_csv(out.stream(), m);
      };
      write("_X.csv", data.problem.X);
      write("_y.csv", data.problem.y);
      write("_w.csv", data.w_true);
      return h::kSuccess;
    }
  } catch (const h::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kUsage;
  } catch (const dropreg::Error& e) {
    std::cerr << "error (" << dropreg::to_string(e.code()) << "): " << e.what() << '\n';
    return h::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kUsage;
  }
  return h::kUsage;
}
