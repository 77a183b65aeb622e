#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dropreg/duality.hpp"
#include "dropreg/penalty.hpp"
#include "dropreg/quadrature.hpp"

namespace dropreg {

enum class MaskKind { UnbiasedBinary, Gaussian, BiasedBernoulli, HardConcrete };

struct HardConcreteShape {
  double beta = 2.0 / 3.0;
  double gamma = -0.1;
  double zeta = 1.1;

  /// beta * log(-gamma / zeta); the offset in Pr(s > 0) = sigmoid(log a - offset).
  double log_offset() const;
  friend bool operator==(const HardConcreteShape&, const HardConcreteShape&) = default;
};

/// One coordinate's mask distribution.
///
/// alpha = 0 is accepted by the binary and Gaussian families and means the
/// coordinate is always dropped (s = 0).
class MaskModel {
 public:
  static MaskModel unbiased_binary(double alpha);
  static MaskModel gaussian(double alpha);
  static MaskModel biased_bernoulli(double alpha);
  static MaskModel hard_concrete(double a, HardConcreteShape shape = {});

  /// Same family with a new keep parameter. Not defined for HardConcrete.
  static MaskModel of_kind(MaskKind kind, double alpha);

  MaskKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double a() const { return a_; }
  const HardConcreteShape& shape() const { return shape_; }
  bool unbiased() const { return kind_ == MaskKind::UnbiasedBinary || kind_ == MaskKind::Gaussian; }

  double draw(std::mt19937_64& rng) const;
  std::string to_string() const;

 private:
  MaskModel(MaskKind kind, double alpha, double a, HardConcreteShape shape)
      : kind_(kind), alpha_(alpha), a_(a), shape_(shape) {}

  MaskKind kind_;
  double alpha_;
  double a_;
  HardConcreteShape shape_;
};

/// Parses "binary", "gaussian", "bernoulli" (the family names used by solvers).
MaskKind parse_mask_kind(std::string_view name);
std::string_view to_string(MaskKind kind);

/// dim i.i.d. draws from model, deterministic in seed.
Eigen::VectorXd sample_mask(const MaskModel& model, Eigen::Index dim, std::uint64_t seed);
/// One draw per coordinate, s_j ~ family(alpha_j), from a caller-owned engine.
Eigen::VectorXd sample_mask(MaskKind family, const Eigen::VectorXd& alpha, std::mt19937_64& rng);

struct MaskMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  /// Computed directly rather than as second_moment - mean^2 where that
  /// difference would cancel.
  double variance = 0.0;
};

MaskMoments mask_moments(const MaskModel& model, const QuadratureOptions& opts = {});

/// Pr(s > 0) for HardConcrete(a).
double hardconcrete_prob_nonzero(double a, const HardConcreteShape& shape = {});

double alpha_from_eta(double eta, double lambda);
double eta_from_alpha(double alpha, double lambda);

struct BiasedReparam {
  double alpha_tilde;
  double eta_tilde;
  double mu;
};

/// alpha~ = mu^2 / E[s^2], eta~ = lambda / (1/alpha~ - 1). Throws
/// DegenerateMask when mu <= 0 or the mask has zero variance.
BiasedReparam biased_reparam(const MaskModel& model, double lambda);

/// The f of biased Bernoulli dropout with alpha(eta) = eta / (eta + lambda):
/// the expected number of kept coordinates, per coordinate.
double biased_bernoulli_f(double eta, double lambda);

/// (1/2n) ||y - X w||^2.
double linear_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

/// Throws NotStandardized unless |[X^T X / n]_jj - 1| <= tol for every j.
void require_standardized(const Eigen::MatrixXd& X, double tol = 1e-8);

/// E[L(s . w)] = L(mu . w) + (1/2) sum_j Var(s_j) w_j^2 [X^T X / n]_jj.
double expected_loss_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, const std::vector<MaskModel>& masks);
/// Unbiased masks with keep parameters alpha: L(w) + (1/2) w^T ((1/alpha - 1) . G) w.
double expected_loss_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, const Eigen::VectorXd& alpha);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

MonteCarloEstimate expected_loss_monte_carlo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& w,
                                             const std::vector<MaskModel>& masks,
                                             std::size_t n_samples, std::uint64_t seed);

/// lambda e^z / w2^2 per coordinate; w2_j = 0 gives +inf.
EtaVector standout_eta_hat(const Eigen::VectorXd& z_plus, const Eigen::VectorXd& w2,
                           double lambda);
/// (1/lambda) sum_j w2_j^2 (1 - (z_j + 1) e^{-z_j}).
double standout_omega(const Eigen::VectorXd& z_plus, const Eigen::VectorXd& w2, double lambda);
double standout_omega_scalar(double z_plus, double w2, double lambda);

/// 2 KL(eta / lambda), the dual of variational dropout's effective penalty.
double vardrop_f(double eta, double lambda, const QuadratureOptions& opts = {});
double vardrop_f_derivative(double eta, double lambda);

/// lambda mu^2 / Var(s) for HardConcrete(a).
double hardconcrete_eta_tilde(double a, double lambda, const HardConcreteShape& shape = {});
/// Inverse of hardconcrete_eta_tilde in a, by bisection over log a in
/// [-20, 20]. Throws InversionFailed outside the bracket or when a 64 point
/// scan finds eta~ non-monotone.
double hardconcrete_a_from_eta(double eta_tilde, double lambda, const HardConcreteShape& shape = {});
/// 2 Pr(s > 0) at a(eta~).
double hardconcrete_f(double eta_tilde, double lambda, const HardConcreteShape& shape = {});

inline constexpr double kHardConcreteLogABound = 20.0;

EtaVector magnitude_pruning_eta_hat(const Eigen::VectorXd& w, std::size_t k);
/// round(k_final + (d - k_final) (1 - t/T)^3).
std::size_t pruning_schedule(std::size_t t, std::size_t T, std::size_t k_final, std::size_t d);

enum class MethodKind { Standout, VariationalDropout, HardConcreteL0, MagnitudePruning };

struct MethodSpec {
  MethodKind kind = MethodKind::VariationalDropout;
  double lambda = 1.0;
  double w2 = 1.0;           // Standout
  HardConcreteShape shape;   // HardConcreteL0
  std::size_t k = 0;         // MagnitudePruning final k
  std::size_t steps = 0;     // MagnitudePruning schedule length; 0 means a fixed k

  static MethodSpec standout(double lambda, double w2);
  static MethodSpec vardrop(double lambda);
  static MethodSpec hard_concrete(double lambda, HardConcreteShape shape = {});
  static MethodSpec magnitude_pruning(std::size_t k, std::size_t steps = 0);

  bool separable() const { return kind != MethodKind::MagnitudePruning; }
  std::string to_string() const;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// "vardrop:lambda=1", "hardconcrete:lambda=1[,beta=..,gamma=..,zeta=..]",
/// "standout:lambda=1,w2=1", "magprune:k=5[,steps=100]".
MethodSpec parse_method(std::string_view text);
bool is_method_name(std::string_view name);

/// The horizontal axis for HardConcrete. Reparameterized reads |w| as the
/// mean-scaled weight mu . w; Raw keeps the original weight and leaves the
/// mean shift in the loss, so only the variance term is penalized.
enum class PenaltyAxis { Reparameterized, Raw };

struct EffectivePenaltyOptions {
  Minimize1DOptions minimize;
  PenaltyAxis axis = PenaltyAxis::Reparameterized;
};

/// The effective penalty Omega(|w|) of a separable dropout method, with its
/// dual tabulated once so that whole curves are cheap.
class EffectivePenalty {
 public:
  explicit EffectivePenalty(const MethodSpec& method, const EffectivePenaltyOptions& opts = {});

  double operator()(double w_magnitude) const { return minimize(w_magnitude).value; }
  /// Value and minimizing eta (eta~ for HardConcrete).
  MinimizeResult minimize(double w_magnitude) const;
  const MethodSpec& method() const { return method_; }

 private:
  MethodSpec method_;
  std::optional<TabulatedDual> dual_;
};

double effective_penalty(const MethodSpec& method, double w_magnitude,
                         const EffectivePenaltyOptions& opts = {});

}  // namespace dropreg
