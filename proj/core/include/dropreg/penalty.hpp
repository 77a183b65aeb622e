#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dropreg/scalar_fn.hpp"

namespace dropreg {

/// Per-coordinate auxiliary weights in [0, +inf].
///
/// eta_j = 0 forces w_j to zero (infinite Tikhonov weight); eta_j = +inf
/// leaves w_j unpenalized.
class EtaVector {
 public:
  EtaVector() = default;
  explicit EtaVector(Eigen::VectorXd values);

  static EtaVector constant(Eigen::Index size, double value);

  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index j) const { return values_[j]; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index count_nonzero() const;

  friend bool operator==(const EtaVector& a, const EtaVector& b) {
    return a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
  }

 private:
  Eigen::VectorXd values_;
};

enum class PenaltyKind {
  L1,
  Lp,
  LpPow,
  L0,
  ElasticNet,
  Huber,
  LogSum,
  Scad,
  Mcp,
  HardThresh,
};

struct PenaltyParams {
  double p = 0.0;       // Lp, LpPow
  double theta = 0.0;   // ElasticNet
  double eps = 0.0;     // Huber, LogSum
  double a = 0.0;       // Scad, Mcp
  double lambda = 0.0;  // Scad, Mcp (internal scale, distinct from the outer weight)
  std::size_t k = 0;    // HardThresh

  friend bool operator==(const PenaltyParams&, const PenaltyParams&) = default;
};

/// A penalty from the closed-form zoo: Omega, its eta-trick dual f, the
/// minimizing update eta_hat and the dual domain H.
///
/// Scalar members give the per-coordinate form. For the two non-separable
/// penalties they describe the one-dimensional instance (Lp reduces to |w|,
/// HardThresh(k) to the indicator of ||w||_0 > k with d = 1).
class PenaltySpec {
 public:
  static PenaltySpec l1();
  static PenaltySpec lp(double p);
  static PenaltySpec lp_pow(double p);
  static PenaltySpec l0();
  static PenaltySpec elastic_net(double theta);
  static PenaltySpec huber(double eps);
  static PenaltySpec log_sum(double eps);
  static PenaltySpec scad(double a, double lambda);
  static PenaltySpec mcp(double a, double lambda);
  static PenaltySpec hard_thresh(std::size_t k);

  PenaltyKind kind() const { return kind_; }
  const PenaltyParams& params() const { return params_; }
  bool separable() const { return kind_ != PenaltyKind::Lp && kind_ != PenaltyKind::HardThresh; }

  /// Canonical string in the CLI grammar, e.g. "mcp:a=1,lambda=1".
  std::string to_string() const;

  double omega_scalar(double w) const;
  double f_scalar(double eta) const;
  double eta_hat_scalar(double w) const;
  /// dOmega/dw; zero at the non-differentiable point w = 0.
  double omega_derivative(double w) const;
  /// df/deta on the interior of H.
  double f_derivative(double eta) const;
  /// Scalar dual domain H.
  Interval eta_domain() const;

  friend bool operator==(const PenaltySpec&, const PenaltySpec&) = default;

 private:
  PenaltySpec(PenaltyKind kind, PenaltyParams params) : kind_(kind), params_(params) {}

  PenaltyKind kind_;
  PenaltyParams params_;
};

/// w^2 / eta with the boundary conventions: eta = +inf gives 0, eta = 0
/// gives +inf unless w = 0, in which case 0.
double quad_over_eta(double w, double eta);

/// Indices of the k largest |w_j|, in ascending index order. Ties in |w_j|
/// go to the lowest index.
std::vector<Eigen::Index> top_k_indices(const Eigen::VectorXd& w, std::size_t k);

double omega(const PenaltySpec& spec, const Eigen::VectorXd& w);
double f_dual(const PenaltySpec& spec, const EtaVector& eta);
EtaVector eta_hat(const PenaltySpec& spec, const Eigen::VectorXd& w);
bool eta_in_domain(const PenaltySpec& spec, const EtaVector& eta);

/// (1/2)(w^T diag(eta)^-1 w + f(eta)).
double dual_objective(const PenaltySpec& spec, const Eigen::VectorXd& w, const EtaVector& eta);

/// Gradient of Omega (zero at kinks through the origin). All zeros for HardThresh.
Eigen::VectorXd omega_gradient(const PenaltySpec& spec, const Eigen::VectorXd& w);

/// Gradient of f on the interior of H.
Eigen::VectorXd f_gradient(const PenaltySpec& spec, const EtaVector& eta);

/// Parses "name[:key=value,...]". Names: l1, lp, lppow, l0, elasticnet,
/// huber, logsum, scad, mcp, hardthresh. Throws Error(ParseError).
PenaltySpec parse_penalty(std::string_view text);

}  // namespace dropreg
