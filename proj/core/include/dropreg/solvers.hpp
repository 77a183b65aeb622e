#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dropreg/dropout.hpp"
#include "dropreg/penalty.hpp"
#include "dropreg/problem.hpp"
#include "dropreg/regularizer.hpp"

namespace dropreg {

enum class StepSchedule { Constant, LinearDecay };

StepSchedule parse_step_schedule(std::string_view name);
std::string_view to_string(StepSchedule schedule);

struct SolverConfig {
  double lambda = 1.0;
  double step = 0.1;
  StepSchedule schedule = StepSchedule::Constant;
  std::size_t iters = 100;
  std::uint64_t seed = 0;
  /// Mask family for the stochastic solvers. Unset means s = 1.
  std::optional<MaskKind> mask;
  std::size_t log_every = 1;
  /// Standard deviation of a seeded Gaussian initial w; 0 starts from zeros.
  double init_sigma = 0.0;
  /// irls stops early once ||w_t - w_{t-1}|| <= rel_tol ||w_t||; 0 disables.
  double rel_tol = 0.0;
  double zero_tol = 1e-8;

  void validate() const;
  /// rho_t for t = 1..iters.
  double step_at(std::size_t t) const;
};

struct TraceRecord {
  std::size_t iter = 0;
  Eigen::VectorXd w;
  /// Empty for solvers that keep no eta.
  Eigen::VectorXd eta;
  double loss = 0.0;
  double objective = 0.0;
  std::size_t nonzeros = 0;
  double seconds = 0.0;
};

struct Trace {
  std::string solver;
  std::string regularizer;
  std::vector<TraceRecord> records;
  Eigen::VectorXd w_final;
};

Eigen::VectorXd initial_weights(Eigen::Index d, const SolverConfig& config);

/// Alternating exact minimization: w from the reweighted normal equations,
/// then eta = eta_hat(w). Starts from eta = lambda e^5.
Trace irls(const Problem& problem, const Regularizer& reg, const SolverConfig& config);
/// Gradient steps on w and log eta of the joint objective, started at
/// log eta = log lambda + 5 and projected onto H.
Trace joint_gd(const Problem& problem, const Regularizer& reg, const SolverConfig& config);
/// eta = eta_hat(w), then one gradient step on the Tikhonov objective.
Trace ada_tikhonov(const Problem& problem, const Regularizer& reg, const SolverConfig& config);
/// Gradient step on L, eta = eta_hat of that point, then the Tikhonov prox.
Trace ada_prox(const Problem& problem, const Regularizer& reg, const SolverConfig& config);
/// (Sub)gradient descent on L + lambda Omega, with the subgradient 0 at kinks.
Trace direct_gd(const Problem& problem, const Regularizer& reg, const SolverConfig& config);
/// Steps on grad_w L(s . w) with s ~ Mask(alpha), alpha = eta_hat / (eta_hat + lambda).
Trace dropout_sgd(const Problem& problem, const Regularizer& reg, const SolverConfig& config);
/// Adaptive dropout with the additive reparameterization and a proximal v update.
Trace additive_reparam_prox(const Problem& problem, const Regularizer& reg,
                            const SolverConfig& config);
/// Gradient step then keep the top k by magnitude. schedule_steps > 0 shrinks k
/// from d to k with pruning_schedule over that many iterations.
Trace iht(const Problem& problem, std::size_t k, const SolverConfig& config,
          std::size_t schedule_steps = 0);

/// Tikhonov proximal map v_j / (1 + rho lambda / eta_j); eta = inf or
/// lambda = 0 keeps v_j, otherwise eta = 0 gives 0.
Eigen::VectorXd tikhonov_prox(const Eigen::VectorXd& v, const EtaVector& eta, double rho,
                              double lambda);

/// Names accepted by run_solver.
const std::vector<std::string>& solver_names();
/// Dispatch by name; iht reads k from a hardthresh penalty or magprune method.
Trace run_solver(std::string_view name, const Problem& problem, const Regularizer& reg,
                 const SolverConfig& config);

struct SolutionMetrics {
  double precision = 1.0;
  double recall = 1.0;
  double nmse = 0.0;
  double nonzero_fraction = 0.0;
  std::size_t nonzeros = 0;
  bool exact_support = false;
};

/// Support precision and recall against w_true, ||w - w_true||^2 / ||w_true||^2,
/// and the fraction of |w_j| > zero_tol. Without w_true only the counts are set.
SolutionMetrics solution_metrics(const Eigen::VectorXd& w,
                                 const std::optional<Eigen::VectorXd>& w_true,
                                 double zero_tol = 1e-8);
SolutionMetrics solution_metrics(const Trace& trace, const std::optional<Eigen::VectorXd>& w_true,
                                 double zero_tol = 1e-8);

}  // namespace dropreg
