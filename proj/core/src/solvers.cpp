#include "dropreg/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "dropreg/error.hpp"

namespace dropreg {
namespace {

constexpr double kLogEtaInit = 5.0;
constexpr double kJitter = 1e-12;

std::size_t count_nonzeros(const Eigen::VectorXd& w, double tol) {
  return static_cast<std::size_t>((w.array().abs() > tol).count());
}

class Recorder {
 public:
  Recorder(const Problem& problem, const SolverConfig& config, std::string solver, std::string reg)
      : problem_(problem), config_(config), start_(std::chrono::steady_clock::now()) {
    trace_.solver = std::move(solver);
    trace_.regularizer = std::move(reg);
  }

  void record(std::size_t t, const Eigen::VectorXd& w, const Eigen::VectorXd& eta, double omega,
              bool last) {
    if (!last && t % config_.log_every != 0) return;
    TraceRecord r;
    r.iter = t;
    r.w = w;
    r.eta = eta;
    r.loss = linear_loss(problem_.X, problem_.y, w);
    r.objective = r.loss + config_.lambda * omega;
    r.nonzeros = count_nonzeros(w, config_.zero_tol);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    trace_.records.push_back(std::move(r));
  }

  Trace finish(const Eigen::VectorXd& w) {
    trace_.w_final = w;
    return std::move(trace_);
  }

 private:
  const Problem& problem_;
  const SolverConfig& config_;
  std::chrono::steady_clock::time_point start_;
  Trace trace_;
};

void prepare(const Problem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
}

// w - rho * grad L(point). Shared by every proximal-type solver so that
// equivalent update rules produce identical floating-point results.
Eigen::VectorXd gradient_step(const Gram& gram, const Eigen::VectorXd& point,
                              const Eigen::VectorXd& w, double rho) {
  return w - rho * gram.gradient(point);
}

// w_j / eta_j with the boundary conventions used by the Tikhonov term.
Eigen::VectorXd tikhonov_gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& eta) {
  Eigen::VectorXd g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    g[j] = (w[j] == 0.0 || std::isinf(eta[j])) ? 0.0 : w[j] / eta[j];
  }
  return g;
}

Eigen::VectorXd alpha_of(const EtaVector& eta, double lambda) {
  Eigen::VectorXd a(eta.size());
  for (Eigen::Index j = 0; j < eta.size(); ++j) a[j] = alpha_from_eta(eta[j], lambda);
  return a;
}

MaskKind require_unbiased_mask(const SolverConfig& config, const char* solver) {
  if (!config.mask) {
    throw Error(ErrorCode::InvalidCombination, std::string(solver) + " needs a mask family");
  }
  if (*config.mask != MaskKind::UnbiasedBinary && *config.mask != MaskKind::Gaussian) {
    throw Error(ErrorCode::InvalidCombination,
                std::string(solver) + " needs an unbiased mask family (binary or gaussian)");
  }
  if (!(config.lambda > 0.0)) {
    throw Error(ErrorCode::InvalidCombination, std::string(solver) + " needs lambda > 0");
  }
  return *config.mask;
}

Eigen::VectorXd solve_reweighted(const Gram& gram, const EtaVector& eta, double lambda) {
  const Eigen::Index d = gram.c.size();
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (eta[j] > 0.0) active.push_back(j);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  if (active.empty()) return w;
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    b[a] = gram.c[active[static_cast<std::size_t>(a)]];
    for (Eigen::Index c = 0; c < m; ++c) {
      A(a, c) = gram.G(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(c)]);
    }
    A(a, a) += lambda / eta[active[static_cast<std::size_t>(a)]];
  }
  Eigen::VectorXd x;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) x = llt.solve(b);
  if (llt.info() != Eigen::Success || !x.allFinite()) {
    A.diagonal().array() += kJitter;
    llt.compute(A);
    if (llt.info() == Eigen::Success) x = llt.solve(b);
    if (llt.info() != Eigen::Success || !x.allFinite()) {
      throw Error(ErrorCode::SingularSystem, "reweighted normal matrix is singular");
    }
  }
  for (Eigen::Index a = 0; a < m; ++a) w[active[static_cast<std::size_t>(a)]] = x[a];
  return w;
}

}  // namespace

StepSchedule parse_step_schedule(std::string_view name) {
  if (name == "constant") return StepSchedule::Constant;
  if (name == "linear") return StepSchedule::LinearDecay;
  throw Error(ErrorCode::ParseError, "unknown step schedule '" + std::string(name) + "'");
}

std::string_view to_string(StepSchedule schedule) {
  return schedule == StepSchedule::Constant ? "constant" : "linear";
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidParameter, "lambda must be finite and >= 0");
  }
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorCode::InvalidParameter, "step must be > 0");
  if (iters == 0) throw Error(ErrorCode::InvalidParameter, "iters must be >= 1");
  if (log_every == 0) throw Error(ErrorCode::InvalidParameter, "log_every must be >= 1");
  if (!(init_sigma >= 0.0)) throw Error(ErrorCode::InvalidParameter, "init_sigma must be >= 0");
}

double SolverConfig::step_at(std::size_t t) const {
  if (schedule == StepSchedule::Constant) return step;
  return step * (1.0 - static_cast<double>(t - 1) / static_cast<double>(iters));
}

Eigen::VectorXd initial_weights(Eigen::Index d, const SolverConfig& config) {
  if (config.init_sigma == 0.0) return Eigen::VectorXd::Zero(d);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, config.init_sigma);
  Eigen::VectorXd w(d);
  for (Eigen::Index j = 0; j < d; ++j) w[j] = normal(rng);
  return w;
}

Eigen::VectorXd tikhonov_prox(const Eigen::VectorXd& v, const EtaVector& eta, double rho,
                              double lambda) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (lambda == 0.0 || std::isinf(eta[j])) {
      out[j] = v[j];
    } else if (eta[j] == 0.0) {
      out[j] = 0.0;
    } else {
      out[j] = v[j] / (1.0 + rho * lambda / eta[j]);
    }
  }
  return out;
}

Trace irls(const Problem& problem, const Regularizer& reg, const SolverConfig& config) {
  prepare(problem, config);
  const Gram gram(problem);
  Recorder rec(problem, config, "irls", reg.name());
  const Eigen::Index d = problem.d();
  EtaVector eta = EtaVector::constant(d, std::max(config.lambda, 1e-300) * std::exp(kLogEtaInit));
  Eigen::VectorXd w = initial_weights(d, config);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const Progress p{t, config.iters};
    const Eigen::VectorXd prev = w;
    w = solve_reweighted(gram, eta, config.lambda);
    eta = reg.eta_hat(w, p);
    const bool converged =
        config.rel_tol > 0.0 && (w - prev).norm() <= config.rel_tol * w.norm();
    const bool last = t == config.iters || converged;
    rec.record(t, w, eta.values(), reg.omega(w, p), last);
    if (last) break;
  }
  return rec.finish(w);
}

Trace joint_gd(const Problem& problem, const Regularizer& reg, const SolverConfig& config) {
  prepare(problem, config);
  if (!reg.has_smooth_dual()) {
    throw Error(ErrorCode::InvalidCombination, "joint_gd needs a differentiable dual, got " + reg.name());
  }
  const Gram gram(problem);
  Recorder rec(problem, config, "joint_gd", reg.name());
  const Eigen::Index d = problem.d();
  const Interval h = reg.eta_domain();
  const double lambda = config.lambda;
  Eigen::VectorXd w = initial_weights(d, config);
  Eigen::VectorXd theta =
      Eigen::VectorXd::Constant(d, std::log(std::max(lambda, 1e-300)) + kLogEtaInit);
  auto project = [&h](Eigen::VectorXd& th) {
    Eigen::VectorXd eta(th.size());
    for (Eigen::Index j = 0; j < th.size(); ++j) {
      th[j] = std::clamp(th[j], -700.0, 700.0);
      eta[j] = std::clamp(std::exp(th[j]), h.lo, h.hi);
      if (eta[j] > 0.0) th[j] = std::log(eta[j]);
    }
    return eta;
  };
  Eigen::VectorXd eta = project(theta);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const double rho = config.step_at(t);
    const EtaVector ev(eta);
    const Eigen::VectorXd fprime = reg.f_gradient(ev);
    const Eigen::VectorXd gw = gram.gradient(w) + lambda * tikhonov_gradient(w, eta);
    Eigen::VectorXd gtheta(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      gtheta[j] = 0.5 * lambda * (-quad_over_eta(w[j], eta[j]) + eta[j] * fprime[j]);
    }
    w -= rho * gw;
    theta -= rho * gtheta;
    eta = project(theta);
    rec.record(t, w, eta, reg.omega(w, {t, config.iters}), t == config.iters);
  }
  return rec.finish(w);
}

Trace ada_tikhonov(const Problem& problem, const Regularizer& reg, const SolverConfig& config) {
  prepare(problem, config);
  const Gram gram(problem);
  Recorder rec(problem, config, "ada_tikhonov", reg.name());
  Eigen::VectorXd w = initial_weights(problem.d(), config);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const Progress p{t, config.iters};
    const double rho = config.step_at(t);
    const EtaVector eta = reg.eta_hat(w, p);
    if (config.lambda == 0.0) {
      w -= rho * gram.gradient(w);
    } else {
      w -= rho * (gram.gradient(w) + config.lambda * tikhonov_gradient(w, eta.values()));
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (eta[j] == 0.0) w[j] = 0.0;
      }
    }
    rec.record(t, w, eta.values(), reg.omega(w, p), t == config.iters);
  }
  return rec.finish(w);
}

Trace ada_prox(const Problem& problem, const Regularizer& reg, const SolverConfig& config) {
  prepare(problem, config);
  const Gram gram(problem);
  Recorder rec(problem, config, "ada_prox", reg.name());
  Eigen::VectorXd w = initial_weights(problem.d(), config);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const Progress p{t, config.iters};
    const double rho = config.step_at(t);
    const Eigen::VectorXd v = gradient_step(gram, w, w, rho);
    const EtaVector eta = reg.eta_hat(v, p);
    w = tikhonov_prox(v, eta, rho, config.lambda);
    rec.record(t, w, eta.values(), reg.omega(w, p), t == config.iters);
  }
  return rec.finish(w);
}

Trace direct_gd(const Problem& problem, const Regularizer& reg, const SolverConfig& config) {
  prepare(problem, config);
  const Gram gram(problem);
  Recorder rec(problem, config, "direct_gd", reg.name());
  Eigen::VectorXd w = initial_weights(problem.d(), config);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const double rho = config.step_at(t);
    w -= rho * (gram.gradient(w) + config.lambda * reg.omega_gradient(w));
    rec.record(t, w, Eigen::VectorXd(), reg.omega(w, {t, config.iters}), t == config.iters);
  }
  return rec.finish(w);
}

Trace dropout_sgd(const Problem& problem, const Regularizer& reg, const SolverConfig& config) {
  prepare(problem, config);
  const MaskKind family = require_unbiased_mask(config, "dropout_sgd");
  const Gram gram(problem);
  Recorder rec(problem, config, "dropout_sgd", reg.name());
  std::mt19937_64 rng(config.seed);
  Eigen::VectorXd w = initial_weights(problem.d(), config);
  Eigen::VectorXd alpha = Eigen::VectorXd::Ones(problem.d());
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const Progress p{t, config.iters};
    const double rho = config.step_at(t);
    const Eigen::VectorXd s = sample_mask(family, alpha, rng);
    const Eigen::VectorXd sw = s.cwiseProduct(w);
    w -= rho * s.cwiseProduct(gram.gradient(sw));
    const EtaVector eta = reg.eta_hat(w, p);
    alpha = alpha_of(eta, config.lambda);
    rec.record(t, w, eta.values(), reg.omega(w, p), t == config.iters);
  }
  return rec.finish(w);
}

Trace additive_reparam_prox(const Problem& problem, const Regularizer& reg,
                            const SolverConfig& config) {
  prepare(problem, config);
  std::optional<MaskKind> family;
  if (config.mask) family = require_unbiased_mask(config, "additive_reparam_prox");
  const Gram gram(problem);
  Recorder rec(problem, config, "additive_reparam_prox", reg.name());
  std::mt19937_64 rng(config.seed);
  const Eigen::Index d = problem.d();
  Eigen::VectorXd w = initial_weights(d, config);
  Eigen::VectorXd v = w;
  Eigen::VectorXd alpha = Eigen::VectorXd::Ones(d);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const Progress p{t, config.iters};
    const double rho = config.step_at(t);
    Eigen::VectorXd point = w;
    if (family) {
      const Eigen::VectorXd s = sample_mask(*family, alpha, rng);
      point = w + (s.array() - 1.0).matrix().cwiseProduct(v);
    }
    const Eigen::VectorXd w1 = gradient_step(gram, point, w, rho);
    const Eigen::VectorXd& v1 = w1;
    const EtaVector eta = reg.eta_hat(v1, p);
    v = tikhonov_prox(v1, eta, rho, config.lambda);
    w = v;
    if (family) alpha = alpha_of(eta, config.lambda);
    rec.record(t, w, eta.values(), reg.omega(w, p), t == config.iters);
  }
  return rec.finish(w);
}

Trace iht(const Problem& problem, std::size_t k, const SolverConfig& config,
          std::size_t schedule_steps) {
  prepare(problem, config);
  const auto d = static_cast<std::size_t>(problem.d());
  if (k > d) throw Error(ErrorCode::InvalidParameter, "iht needs k <= d");
  const Gram gram(problem);
  const std::string name =
      "hardthresh:k=" + std::to_string(k) +
      (schedule_steps > 0 ? ",steps=" + std::to_string(schedule_steps) : std::string());
  Recorder rec(problem, config, "iht", name);
  Eigen::VectorXd w = initial_weights(problem.d(), config);
  for (std::size_t t = 1; t <= config.iters; ++t) {
    const double rho = config.step_at(t);
    const std::size_t k_t = schedule_steps > 0 ? pruning_schedule(t, schedule_steps, k, d) : k;
    const Eigen::VectorXd v = gradient_step(gram, w, w, rho);
    w.setZero();
    for (Eigen::Index j : top_k_indices(v, k_t)) w[j] = v[j];
    rec.record(t, w, Eigen::VectorXd(), omega(PenaltySpec::hard_thresh(k_t), w),
               t == config.iters);
  }
  return rec.finish(w);
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {
      "irls",      "joint_gd",    "ada_tikhonov",          "ada_prox",
      "direct_gd", "dropout_sgd", "additive_reparam_prox", "iht"};
  return names;
}

Trace run_solver(std::string_view name, const Problem& problem, const Regularizer& reg,
                 const SolverConfig& config) {
  if (name == "irls") return irls(problem, reg, config);
  if (name == "joint_gd") return joint_gd(problem, reg, config);
  if (name == "ada_tikhonov") return ada_tikhonov(problem, reg, config);
  if (name == "ada_prox") return ada_prox(problem, reg, config);
  if (name == "direct_gd") return direct_gd(problem, reg, config);
  if (name == "dropout_sgd") return dropout_sgd(problem, reg, config);
  if (name == "additive_reparam_prox") return additive_reparam_prox(problem, reg, config);
  if (name == "iht") {
    if (const PenaltySpec* spec = reg.penalty(); spec && spec->kind() == PenaltyKind::HardThresh) {
      return iht(problem, spec->params().k, config);
    }
    if (const MethodSpec* m = reg.method(); m && m->kind == MethodKind::MagnitudePruning) {
      return iht(problem, m->k, config, m->steps);
    }
    throw Error(ErrorCode::InvalidCombination, "iht needs hardthresh:k=.. or magprune:k=..");
  }
  throw Error(ErrorCode::InvalidParameter, "unknown solver '" + std::string(name) + "'");
}

SolutionMetrics solution_metrics(const Eigen::VectorXd& w,
                                 const std::optional<Eigen::VectorXd>& w_true, double zero_tol) {
  SolutionMetrics m;
  m.nonzeros = count_nonzeros(w, zero_tol);
  m.nonzero_fraction = w.size() > 0 ? static_cast<double>(m.nonzeros) / static_cast<double>(w.size()) : 0.0;
  if (!w_true) return m;
  if (w_true->size() != w.size()) throw Error(ErrorCode::InvalidParameter, "w_true size differs");
  std::size_t hits = 0;
  std::size_t truth = 0;
  bool exact = true;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const bool est = std::abs(w[j]) > zero_tol;
    const bool tru = (*w_true)[j] != 0.0;
    hits += static_cast<std::size_t>(est && tru);
    truth += static_cast<std::size_t>(tru);
    exact = exact && est == tru;
  }
  m.precision = m.nonzeros > 0 ? static_cast<double>(hits) / static_cast<double>(m.nonzeros) : 1.0;
  m.recall = truth > 0 ? static_cast<double>(hits) / static_cast<double>(truth) : 1.0;
  const double denom = w_true->squaredNorm();
  const double err = (w - *w_true).squaredNorm();
  m.nmse = denom > 0.0 ? err / denom : err;
  m.exact_support = exact;
  return m;
}

SolutionMetrics solution_metrics(const Trace& trace, const std::optional<Eigen::VectorXd>& w_true,
                                 double zero_tol) {
  return solution_metrics(trace.w_final, w_true, zero_tol);
}

}  // namespace dropreg
