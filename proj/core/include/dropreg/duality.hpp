#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dropreg/penalty.hpp"
#include "dropreg/quadrature.hpp"
#include "dropreg/scalar_fn.hpp"

namespace dropreg {

struct Minimize1DOptions {
  double grid_lo = 1e-8;
  double grid_hi = 1e8;
  int grid_points = 256;
  double refine_tol = 1e-10;

  void validate() const;
};

struct MinimizeResult {
  double value = kInf;
  double argmin = kInf;
  /// True when the minimum sits at an end of H or of the search bracket.
  bool boundary = false;
};

/// min over eta in H of (1/2)(w^2/eta + f(eta)), with f tabulated once on a
/// log-spaced grid so that many w can be processed cheaply.
///
/// The general form walks a monotone parametric path t -> (eta(t), f(t)),
/// which lets callers search over a natural parameter when f is only known
/// through one (HardConcrete uses log a).
class TabulatedDual {
 public:
  TabulatedDual(const ScalarFn& f, Interval domain, const Minimize1DOptions& opts = {});

  static TabulatedDual parametric(std::function<double(double)> eta_of_t,
                                  std::function<double(double)> f_of_t, double t_lo, double t_hi,
                                  const Minimize1DOptions& opts = {});

  MinimizeResult minimize(double w) const;

 private:
  TabulatedDual() = default;
  void tabulate(int points);

  std::function<double(double)> eta_of_t_;
  std::function<double(double)> f_of_t_;
  double refine_tol_ = 1e-10;
  std::vector<double> t_;
  std::vector<double> eta_;
  std::vector<double> f_;
  // Optional sentinel ends of H outside the grid (eta = 0 below, +inf above).
  bool has_zero_ = false;
  double f_zero_ = kInf;
  bool has_inf_ = false;
  double f_inf_ = kInf;
};

/// Omega(w) = min over H of (1/2)(w^2/eta + f(eta)); throws EmptyDomain when
/// H misses the search bracket.
MinimizeResult omega_from_f(const ScalarFn& f, Interval domain, double w,
                            const Minimize1DOptions& opts = {});

struct ConjugateResult {
  double value = kInf;
  /// The supremum sits at u = 0, so eta lies outside H and f is +inf there.
  bool boundary = false;
  /// Omega passed subquadratic_check on the search grid.
  bool reliable = true;
};

/// f(eta) = sup over u >= 0 of 2 Omega(sqrt(u)) - u/eta.
///
/// When the supremum is pinned at u = 0 with a strictly negative slope, eta
/// lies below every attainable eta_hat and the result is +inf with boundary
/// set. eta = 0 is read as the limit eta -> 0+ and evaluated at grid_lo.
ConjugateResult f_from_omega(const ScalarFn& omega_fn, double eta,
                             const Minimize1DOptions& opts = {});

/// Omega(w) = C_a + int_a^{w^2} dt / (2 eta_hat(sqrt t)). The anchor lives on
/// the t = w^2 axis. Throws NonMonotoneUpdate when eta_hat decreases.
double omega_from_eta_hat(const ScalarFn& eta_hat_fn, double w, double anchor,
                          double anchor_value, const QuadratureOptions& opts = {});

/// 1 / (2 dOmega/du) at u = w^2 by finite differences. fd_step <= 0 selects
/// max(1e-6, 1e-6 w^2). Returns +inf when the derivative vanishes.
double eta_hat_from_omega(const ScalarFn& omega_fn, double w, double fd_step = 0.0);

struct SubquadraticReport {
  bool ok = true;
  double worst_violation = 0.0;
  double worst_u = 0.0;
};

/// Concavity of g(u) = Omega(sqrt u) via second differences on a sorted grid.
/// Nonuniform grids use the slope-change form, which equals the central
/// second difference when the spacing is uniform.
SubquadraticReport subquadratic_check(const ScalarFn& omega_fn, const std::vector<double>& u_grid,
                                      double tol = 1e-8);

struct DualCheckReport {
  std::string penalty;
  double max_omega_dev = 0.0;
  double max_argmin_rel_dev = 0.0;
  int points = 0;
  int argmin_points = 0;
  bool passed = true;
};

struct DualCheckOptions {
  double omega_tol = 1e-6;
  double argmin_tol = 1e-4;
  /// Vector dimension for the non-separable penalties.
  int dim = 3;
  unsigned seed = 7;
  /// Constant added to f before checking; nonzero values act as a negative control.
  double f_shift = 0.0;
  Minimize1DOptions minimize;
};

/// Verifies Omega = min_eta J(w, eta) and argmin = eta_hat over w_grid.
/// HardThresh is checked by enumerating every support of size <= k at
/// opts.dim; Lp by evaluating at eta_hat and at random feasible perturbations.
DualCheckReport check_dual_pair(const PenaltySpec& spec, const std::vector<double>& w_grid,
                                const DualCheckOptions& opts = {});

/// Log-spaced grid with n points over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace dropreg
