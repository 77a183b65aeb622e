#include "dropreg/dropout.hpp"

#include <algorithm>
#include <cmath>

#include "dropreg/error.hpp"
#include "dropreg/spec_string.hpp"
#include "dropreg/special.hpp"

namespace dropreg {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, what);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

void validate_shape(const HardConcreteShape& s) {
  require(s.beta > 0.0 && std::isfinite(s.beta), "hard concrete needs beta > 0");
  require(s.gamma < 0.0 && std::isfinite(s.gamma), "hard concrete needs gamma < 0");
  require(s.zeta > 1.0 && std::isfinite(s.zeta), "hard concrete needs zeta > 1");
}

double draw_entry(MaskKind kind, double alpha, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (kind) {
    case MaskKind::UnbiasedBinary:
      if (alpha == 0.0) return 0.0;
      return unif(rng) < alpha ? 1.0 / alpha : 0.0;
    case MaskKind::Gaussian: {
      if (alpha == 0.0) return 0.0;
      std::normal_distribution<double> normal(0.0, 1.0);
      return 1.0 + std::sqrt(1.0 / alpha - 1.0) * normal(rng);
    }
    case MaskKind::BiasedBernoulli:
      return unif(rng) < alpha ? 1.0 : 0.0;
    case MaskKind::HardConcrete:
      break;
  }
  throw Error(ErrorCode::InvalidParameter, "hard concrete masks are not keyed by alpha");
}

// Moments of HardConcrete(a) after the change of variables y = logit(u) + log a.
// On [y_lo, y_hi] the mask is unclamped and u has density sigmoid'(y - log a).
MaskMoments hard_concrete_moments(double a, const HardConcreteShape& sh,
                                  const QuadratureOptions& opts) {
  const double log_a = std::log(a);
  const double span = sh.zeta - sh.gamma;
  const double z_lo = -sh.gamma / span;
  const double z_hi = (1.0 - sh.gamma) / span;
  const double y_lo = sh.beta * logit(z_lo);
  const double y_hi = sh.beta * logit(z_hi);

  const double p_zero = sigmoid(y_lo - log_a);
  const double p_one = sigmoid(log_a - y_hi);
  const double mass = (y_lo - log_a) > 0.0 ? sigmoid(log_a - y_lo) - sigmoid(log_a - y_hi)
                                           : sigmoid(y_hi - log_a) - sigmoid(y_lo - log_a);

  auto weight = [log_a](double y) { return sigmoid(y - log_a) * sigmoid(log_a - y); };
  auto s_of = [&](double y) { return std::clamp(span * sigmoid(y / sh.beta) + sh.gamma, 0.0, 1.0); };
  auto r_of = [&](double y) { return std::clamp(span * (z_hi - sigmoid(y / sh.beta)), 0.0, 1.0); };

  QuadratureOptions q = opts;
  q.abs_tol = std::max(opts.abs_tol * mass, 1e-300);
  auto integrate = [&](auto g) {
    return quad_adaptive([&](double y) { return g(y) * weight(y); }, y_lo, y_hi, q);
  };
  const double i1 = integrate(s_of);
  const double i2 = integrate([&](double y) { const double s = s_of(y); return s * s; });

  MaskMoments m;
  m.mean = p_one + i1;
  m.second_moment = p_one + i2;
  if (m.mean <= 0.5) {
    m.variance = m.second_moment - m.mean * m.mean;
  } else {
    const double j1 = integrate(r_of);
    const double j2 = integrate([&](double y) { const double r = r_of(y); return r * r; });
    const double er = p_zero + j1;
    m.variance = (p_zero + j2) - er * er;
  }
  return m;
}

}  // namespace

double HardConcreteShape::log_offset() const { return beta * std::log(-gamma / zeta); }

MaskModel MaskModel::unbiased_binary(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "binary mask needs alpha in [0, 1]");
  return {MaskKind::UnbiasedBinary, alpha, 0.0, {}};
}

MaskModel MaskModel::gaussian(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "gaussian mask needs alpha in [0, 1]");
  return {MaskKind::Gaussian, alpha, 0.0, {}};
}

MaskModel MaskModel::biased_bernoulli(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "bernoulli mask needs alpha in [0, 1]");
  return {MaskKind::BiasedBernoulli, alpha, 0.0, {}};
}

MaskModel MaskModel::hard_concrete(double a, HardConcreteShape shape) {
  require(a > 0.0 && std::isfinite(a), "hard concrete needs a > 0");
  validate_shape(shape);
  return {MaskKind::HardConcrete, 0.0, a, shape};
}

MaskModel MaskModel::of_kind(MaskKind kind, double alpha) {
  switch (kind) {
    case MaskKind::UnbiasedBinary: return unbiased_binary(alpha);
    case MaskKind::Gaussian: return gaussian(alpha);
    case MaskKind::BiasedBernoulli: return biased_bernoulli(alpha);
    case MaskKind::HardConcrete: break;
  }
  throw Error(ErrorCode::InvalidParameter, "hard concrete masks are not keyed by alpha");
}

double MaskModel::draw(std::mt19937_64& rng) const {
  if (kind_ != MaskKind::HardConcrete) return draw_entry(kind_, alpha_, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const double z = sigmoid((logit(u) + std::log(a_)) / shape_.beta);
  return std::clamp((shape_.zeta - shape_.gamma) * z + shape_.gamma, 0.0, 1.0);
}

std::string MaskModel::to_string() const {
  switch (kind_) {
    case MaskKind::UnbiasedBinary: return "binary:alpha=" + format_real(alpha_);
    case MaskKind::Gaussian: return "gaussian:alpha=" + format_real(alpha_);
    case MaskKind::BiasedBernoulli: return "bernoulli:alpha=" + format_real(alpha_);
    case MaskKind::HardConcrete:
      return "hardconcrete:a=" + format_real(a_) + ",beta=" + format_real(shape_.beta) +
             ",gamma=" + format_real(shape_.gamma) + ",zeta=" + format_real(shape_.zeta);
  }
  return "?";
}

MaskKind parse_mask_kind(std::string_view name) {
  if (name == "binary") return MaskKind::UnbiasedBinary;
  if (name == "gaussian") return MaskKind::Gaussian;
  if (name == "bernoulli") return MaskKind::BiasedBernoulli;
  if (name == "hardconcrete") return MaskKind::HardConcrete;
  throw Error(ErrorCode::ParseError, "unknown mask family '" + std::string(name) + "'");
}

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::UnbiasedBinary: return "binary";
    case MaskKind::Gaussian: return "gaussian";
    case MaskKind::BiasedBernoulli: return "bernoulli";
    case MaskKind::HardConcrete: return "hardconcrete";
  }
  return "?";
}

Eigen::VectorXd sample_mask(const MaskModel& model, Eigen::Index dim, std::uint64_t seed) {
  require(dim >= 1, "sample_mask needs dim >= 1");
  std::mt19937_64 rng(seed);
  Eigen::VectorXd s(dim);
  for (Eigen::Index j = 0; j < dim; ++j) s[j] = model.draw(rng);
  return s;
}

Eigen::VectorXd sample_mask(MaskKind family, const Eigen::VectorXd& alpha, std::mt19937_64& rng) {
  Eigen::VectorXd s(alpha.size());
  for (Eigen::Index j = 0; j < alpha.size(); ++j) s[j] = draw_entry(family, alpha[j], rng);
  return s;
}

MaskMoments mask_moments(const MaskModel& model, const QuadratureOptions& opts) {
  const double alpha = model.alpha();
  switch (model.kind()) {
    case MaskKind::UnbiasedBinary:
    case MaskKind::Gaussian:
      if (alpha == 0.0) return {0.0, 0.0, 0.0};
      return {1.0, 1.0 / alpha, 1.0 / alpha - 1.0};
    case MaskKind::BiasedBernoulli:
      return {alpha, alpha, alpha * (1.0 - alpha)};
    case MaskKind::HardConcrete:
      return hard_concrete_moments(model.a(), model.shape(), opts);
  }
  return {};
}

double hardconcrete_prob_nonzero(double a, const HardConcreteShape& shape) {
  validate_shape(shape);
  return sigmoid(std::log(a) - shape.log_offset());
}

double alpha_from_eta(double eta, double lambda) {
  require(lambda > 0.0, "alpha_from_eta needs lambda > 0");
  require(eta >= 0.0, "alpha_from_eta needs eta >= 0");
  if (std::isinf(eta)) return 1.0;
  return eta / (eta + lambda);
}

double eta_from_alpha(double alpha, double lambda) {
  require(lambda > 0.0, "eta_from_alpha needs lambda > 0");
  require(alpha >= 0.0 && alpha <= 1.0, "eta_from_alpha needs alpha in [0, 1]");
  if (alpha == 1.0) return kInf;
  return lambda * alpha / (1.0 - alpha);
}

BiasedReparam biased_reparam(const MaskModel& model, double lambda) {
  require(lambda > 0.0, "biased_reparam needs lambda > 0");
  const MaskMoments m = mask_moments(model);
  if (!(m.mean > 0.0)) throw Error(ErrorCode::DegenerateMask, "mask mean must be positive");
  if (!(m.variance > 0.0)) {
    throw Error(ErrorCode::DegenerateMask, "mask has zero variance, eta~ would be infinite");
  }
  const double alpha_tilde = m.mean * m.mean / m.second_moment;
  return {alpha_tilde, lambda * m.mean * m.mean / m.variance, m.mean};
}

double biased_bernoulli_f(double eta, double lambda) { return alpha_from_eta(eta, lambda); }

double linear_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  return (y - X * w).squaredNorm() / (2.0 * static_cast<double>(X.rows()));
}

void require_standardized(const Eigen::MatrixXd& X, double tol) {
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double g = X.col(j).squaredNorm() / n;
    if (!(std::abs(g - 1.0) <= tol)) {
      throw Error(ErrorCode::NotStandardized,
                  "column " + std::to_string(j) + " has mean square " + format_real(g));
    }
  }
}

double expected_loss_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, const std::vector<MaskModel>& masks) {
  require(static_cast<Eigen::Index>(masks.size()) == w.size(), "one mask per coordinate");
  require_standardized(X);
  Eigen::VectorXd mu(w.size());
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const MaskMoments m = mask_moments(masks[static_cast<std::size_t>(j)]);
    mu[j] = m.mean;
    penalty += m.variance * w[j] * w[j];
  }
  return linear_loss(X, y, mu.cwiseProduct(w)) + 0.5 * penalty;
}

double expected_loss_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, const Eigen::VectorXd& alpha) {
  require(alpha.size() == w.size(), "one alpha per coordinate");
  require((alpha.array() > 0.0).all() && (alpha.array() <= 1.0).all(), "alpha must lie in (0, 1]");
  require_standardized(X);
  const Eigen::VectorXd diag = (X.colwise().squaredNorm() / static_cast<double>(X.rows())).transpose();
  const double penalty =
      ((alpha.array().inverse() - 1.0) * diag.array() * w.array().square()).sum();
  return linear_loss(X, y, w) + 0.5 * penalty;
}

MonteCarloEstimate expected_loss_monte_carlo(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& w,
                                             const std::vector<MaskModel>& masks,
                                             std::size_t n_samples, std::uint64_t seed) {
  require(static_cast<Eigen::Index>(masks.size()) == w.size(), "one mask per coordinate");
  require(n_samples >= 2, "monte carlo needs at least two samples");
  require_standardized(X);
  std::mt19937_64 rng(seed);
  const Eigen::Index d = w.size();
  const double inv_2n = 1.0 / (2.0 * static_cast<double>(X.rows()));
  constexpr Eigen::Index kBatch = 512;

  // Sums are taken about the first loss to keep the variance exact when
  // every sample agrees.
  double shift = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::MatrixXd masked(d, kBatch);
  std::size_t done = 0;
  while (done < n_samples) {
    const Eigen::Index b = static_cast<Eigen::Index>(std::min<std::size_t>(kBatch, n_samples - done));
    for (Eigen::Index c = 0; c < b; ++c) {
      for (Eigen::Index j = 0; j < d; ++j) {
        masked(j, c) = masks[static_cast<std::size_t>(j)].draw(rng) * w[j];
      }
    }
    const Eigen::MatrixXd resid = (-X * masked.leftCols(b)).colwise() + y;
    Eigen::VectorXd losses = resid.colwise().squaredNorm().transpose() * inv_2n;
    if (done == 0) shift = losses[0];
    losses.array() -= shift;
    sum += losses.sum();
    sum_sq += losses.squaredNorm();
    done += static_cast<std::size_t>(b);
  }
  const double n = static_cast<double>(n_samples);
  const double centered = sum / n;
  const double var = std::max(0.0, (sum_sq - n * centered * centered) / (n - 1.0));
  return {shift + centered, std::sqrt(var / n), n_samples};
}

EtaVector standout_eta_hat(const Eigen::VectorXd& z_plus, const Eigen::VectorXd& w2,
                           double lambda) {
  require(z_plus.size() == w2.size(), "z and w2 sizes differ");
  require(lambda > 0.0, "standout needs lambda > 0");
  Eigen::VectorXd out(z_plus.size());
  for (Eigen::Index j = 0; j < z_plus.size(); ++j) {
    require(z_plus[j] >= 0.0, "standout needs z >= 0");
    out[j] = w2[j] == 0.0 ? kInf : lambda * std::exp(z_plus[j]) / (w2[j] * w2[j]);
  }
  return EtaVector(std::move(out));
}

double standout_omega_scalar(double z_plus, double w2, double lambda) {
  require(lambda > 0.0, "standout needs lambda > 0");
  require(z_plus >= 0.0, "standout needs z >= 0");
  if (std::isinf(z_plus)) return w2 * w2 / lambda;
  const double tail = -std::expm1(-z_plus) - z_plus * std::exp(-z_plus);
  return w2 * w2 * tail / lambda;
}

double standout_omega(const Eigen::VectorXd& z_plus, const Eigen::VectorXd& w2, double lambda) {
  require(z_plus.size() == w2.size(), "z and w2 sizes differ");
  double total = 0.0;
  for (Eigen::Index j = 0; j < z_plus.size(); ++j) {
    total += standout_omega_scalar(z_plus[j], w2[j], lambda);
  }
  return total;
}

double vardrop_f(double eta, double lambda, const QuadratureOptions& opts) {
  require(lambda > 0.0, "vardrop needs lambda > 0");
  require(eta >= 0.0, "vardrop needs eta >= 0");
  return 2.0 * kl_loguniform(eta / lambda, opts);
}

double vardrop_f_derivative(double eta, double lambda) {
  require(lambda > 0.0, "vardrop needs lambda > 0");
  return 2.0 / lambda * kl_loguniform_integrand(eta / lambda);
}

double hardconcrete_eta_tilde(double a, double lambda, const HardConcreteShape& shape) {
  require(lambda > 0.0, "hard concrete needs lambda > 0");
  const MaskMoments m = mask_moments(MaskModel::hard_concrete(a, shape));
  return lambda * m.mean * m.mean / m.variance;
}

double hardconcrete_a_from_eta(double eta_tilde, double lambda, const HardConcreteShape& shape) {
  constexpr int kScan = 64;
  constexpr double kB = kHardConcreteLogABound;
  auto eta_at = [&](double t) { return hardconcrete_eta_tilde(std::exp(t), lambda, shape); };
  double prev = eta_at(-kB);
  const double eta_lo = prev;
  for (int i = 1; i < kScan; ++i) {
    const double cur = eta_at(-kB + 2.0 * kB * i / (kScan - 1));
    if (!(cur > prev)) {
      throw Error(ErrorCode::InversionFailed, "eta~(a) is not increasing on the log a bracket");
    }
    prev = cur;
  }
  const double eta_hi = prev;
  if (!(eta_tilde >= eta_lo && eta_tilde <= eta_hi)) {
    throw Error(ErrorCode::InversionFailed,
                "eta~ = " + format_real(eta_tilde) + " is outside [" + format_real(eta_lo) + ", " +
                    format_real(eta_hi) + "]");
  }
  double lo = -kB;
  double hi = kB;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (eta_at(mid) < eta_tilde) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

double hardconcrete_f(double eta_tilde, double lambda, const HardConcreteShape& shape) {
  const double a = hardconcrete_a_from_eta(eta_tilde, lambda, shape);
  return 2.0 * sigmoid(std::log(a) - shape.log_offset());
}

EtaVector magnitude_pruning_eta_hat(const Eigen::VectorXd& w, std::size_t k) {
  require(k <= static_cast<std::size_t>(w.size()), "pruning needs k <= d");
  return eta_hat(PenaltySpec::hard_thresh(k), w);
}

std::size_t pruning_schedule(std::size_t t, std::size_t T, std::size_t k_final, std::size_t d) {
  require(k_final <= d, "pruning schedule needs k_final <= d");
  if (T == 0 || t >= T) return k_final;
  const double frac = 1.0 - static_cast<double>(t) / static_cast<double>(T);
  const double k = static_cast<double>(k_final) +
                   static_cast<double>(d - k_final) * frac * frac * frac;
  return static_cast<std::size_t>(std::llround(k));
}

MethodSpec MethodSpec::standout(double lambda, double w2) {
  require(lambda > 0.0 && std::isfinite(lambda), "standout needs lambda > 0");
  require(std::isfinite(w2), "standout needs a finite w2");
  MethodSpec m;
  m.kind = MethodKind::Standout;
  m.lambda = lambda;
  m.w2 = w2;
  return m;
}

MethodSpec MethodSpec::vardrop(double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), "vardrop needs lambda > 0");
  MethodSpec m;
  m.kind = MethodKind::VariationalDropout;
  m.lambda = lambda;
  return m;
}

MethodSpec MethodSpec::hard_concrete(double lambda, HardConcreteShape shape) {
  require(lambda > 0.0 && std::isfinite(lambda), "hardconcrete needs lambda > 0");
  validate_shape(shape);
  MethodSpec m;
  m.kind = MethodKind::HardConcreteL0;
  m.lambda = lambda;
  m.shape = shape;
  return m;
}

MethodSpec MethodSpec::magnitude_pruning(std::size_t k, std::size_t steps) {
  MethodSpec m;
  m.kind = MethodKind::MagnitudePruning;
  m.k = k;
  m.steps = steps;
  return m;
}

std::string MethodSpec::to_string() const {
  switch (kind) {
    case MethodKind::Standout:
      return "standout:lambda=" + format_real(lambda) + ",w2=" + format_real(w2);
    case MethodKind::VariationalDropout:
      return "vardrop:lambda=" + format_real(lambda);
    case MethodKind::HardConcreteL0: {
      std::string out = "hardconcrete:lambda=" + format_real(lambda);
      if (!(shape == HardConcreteShape{})) {
        out += ",beta=" + format_real(shape.beta) + ",gamma=" + format_real(shape.gamma) +
               ",zeta=" + format_real(shape.zeta);
      }
      return out;
    }
    case MethodKind::MagnitudePruning:
      return "magprune:k=" + std::to_string(k) + (steps > 0 ? ",steps=" + std::to_string(steps) : "");
  }
  return "?";
}

bool is_method_name(std::string_view name) {
  return name == "standout" || name == "vardrop" || name == "hardconcrete" || name == "magprune";
}

MethodSpec parse_method(std::string_view text) {
  SpecArgs args(parse_spec_string(text));
  const std::string& name = args.name();
  auto make = [&]() -> MethodSpec {
    if (name == "standout") {
      const double lambda = args.real("lambda");
      return MethodSpec::standout(lambda, args.real_or("w2", 1.0));
    }
    if (name == "vardrop") return MethodSpec::vardrop(args.real("lambda"));
    if (name == "hardconcrete") {
      const double lambda = args.real("lambda");
      HardConcreteShape shape;
      shape.beta = args.real_or("beta", shape.beta);
      shape.gamma = args.real_or("gamma", shape.gamma);
      shape.zeta = args.real_or("zeta", shape.zeta);
      return MethodSpec::hard_concrete(lambda, shape);
    }
    if (name == "magprune") {
      const std::size_t k = args.count("k");
      return MethodSpec::magnitude_pruning(k, args.count_opt("steps").value_or(0));
    }
    throw Error(ErrorCode::ParseError, "unknown method '" + name + "'");
  };
  try {
    MethodSpec spec = make();
    args.finish();
    return spec;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidParameter) throw Error(ErrorCode::ParseError, e.what());
    throw;
  }
}

EffectivePenalty::EffectivePenalty(const MethodSpec& method, const EffectivePenaltyOptions& opts)
    : method_(method) {
  const double lambda = method.lambda;
  switch (method.kind) {
    case MethodKind::Standout:
      break;
    case MethodKind::VariationalDropout: {
      const Interval h{0.0, kInf};
      dual_.emplace(ScalarFn("vardrop_f", h, [lambda](double eta) { return vardrop_f(eta, lambda); }),
                    h, opts.minimize);
      break;
    }
    case MethodKind::HardConcreteL0: {
      const HardConcreteShape shape = method.shape;
      const double offset = shape.log_offset();
      std::function<double(double)> eta_of_t;
      if (opts.axis == PenaltyAxis::Reparameterized) {
        eta_of_t = [lambda, shape](double t) {
          return hardconcrete_eta_tilde(std::exp(t), lambda, shape);
        };
      } else {
        eta_of_t = [lambda, shape](double t) {
          return lambda / mask_moments(MaskModel::hard_concrete(std::exp(t), shape)).variance;
        };
      }
      auto f_of_t = [offset](double t) { return 2.0 * sigmoid(t - offset); };
      dual_ = TabulatedDual::parametric(std::move(eta_of_t), f_of_t, -kHardConcreteLogABound,
                                        kHardConcreteLogABound, opts.minimize);
      break;
    }
    case MethodKind::MagnitudePruning:
      throw Error(ErrorCode::ScalarUnsupported,
                  "magnitude pruning is a vector-level indicator with no scalar penalty");
  }
}

MinimizeResult EffectivePenalty::minimize(double w_magnitude) const {
  require(w_magnitude >= 0.0, "effective penalty needs |w| >= 0");
  if (method_.kind == MethodKind::Standout) {
    const double eta = method_.w2 == 0.0
                           ? kInf
                           : method_.lambda * std::exp(w_magnitude) / (method_.w2 * method_.w2);
    return {standout_omega_scalar(w_magnitude, method_.w2, method_.lambda), eta, false};
  }
  return dual_->minimize(w_magnitude);
}

double effective_penalty(const MethodSpec& method, double w_magnitude,
                         const EffectivePenaltyOptions& opts) {
  return EffectivePenalty(method, opts)(w_magnitude);
}

}  // namespace dropreg
