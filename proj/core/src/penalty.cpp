#include "dropreg/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dropreg/error.hpp"
#include "dropreg/spec_string.hpp"

namespace dropreg {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, what);
}

double sign(double w) { return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0); }

// Dual exponent q = p / (2 - p) shared by Lp and LpPow.
double dual_exponent(double p) { return p / (2.0 - p); }

}  // namespace

EtaVector::EtaVector(Eigen::VectorXd values) : values_(std::move(values)) {
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    if (std::isnan(values_[j]) || values_[j] < 0.0) {
      throw Error(ErrorCode::InvalidParameter,
                  "eta entries must lie in [0, +inf], got " + format_real(values_[j]));
    }
  }
}

EtaVector EtaVector::constant(Eigen::Index size, double value) {
  return EtaVector(Eigen::VectorXd::Constant(size, value));
}

Eigen::Index EtaVector::count_nonzero() const { return (values_.array() != 0.0).count(); }

PenaltySpec PenaltySpec::l1() { return {PenaltyKind::L1, {}}; }

PenaltySpec PenaltySpec::lp(double p) {
  require(p > 0.0 && p < 2.0, "lp needs p in (0, 2)");
  PenaltyParams params;
  params.p = p;
  return {PenaltyKind::Lp, params};
}

PenaltySpec PenaltySpec::lp_pow(double p) {
  require(p > 0.0 && p < 2.0, "lppow needs p in (0, 2)");
  PenaltyParams params;
  params.p = p;
  return {PenaltyKind::LpPow, params};
}

PenaltySpec PenaltySpec::l0() { return {PenaltyKind::L0, {}}; }

PenaltySpec PenaltySpec::elastic_net(double theta) {
  require(theta > 0.0 && theta < 1.0, "elasticnet needs theta in (0, 1)");
  PenaltyParams params;
  params.theta = theta;
  return {PenaltyKind::ElasticNet, params};
}

PenaltySpec PenaltySpec::huber(double eps) {
  require(eps > 0.0 && std::isfinite(eps), "huber needs eps > 0");
  PenaltyParams params;
  params.eps = eps;
  return {PenaltyKind::Huber, params};
}

PenaltySpec PenaltySpec::log_sum(double eps) {
  require(eps > 0.0 && std::isfinite(eps), "logsum needs eps > 0");
  PenaltyParams params;
  params.eps = eps;
  return {PenaltyKind::LogSum, params};
}

PenaltySpec PenaltySpec::scad(double a, double lambda) {
  require(a > 1.0 && std::isfinite(a), "scad needs a > 1");
  require(lambda > 0.0 && std::isfinite(lambda), "scad needs lambda > 0");
  PenaltyParams params;
  params.a = a;
  params.lambda = lambda;
  return {PenaltyKind::Scad, params};
}

PenaltySpec PenaltySpec::mcp(double a, double lambda) {
  require(a > 0.0 && std::isfinite(a), "mcp needs a > 0");
  require(lambda > 0.0 && std::isfinite(lambda), "mcp needs lambda > 0");
  PenaltyParams params;
  params.a = a;
  params.lambda = lambda;
  return {PenaltyKind::Mcp, params};
}

PenaltySpec PenaltySpec::hard_thresh(std::size_t k) {
  PenaltyParams params;
  params.k = k;
  return {PenaltyKind::HardThresh, params};
}

std::string PenaltySpec::to_string() const {
  const auto& q = params_;
  switch (kind_) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::Lp: return "lp:p=" + format_real(q.p);
    case PenaltyKind::LpPow: return "lppow:p=" + format_real(q.p);
    case PenaltyKind::L0: return "l0";
    case PenaltyKind::ElasticNet: return "elasticnet:theta=" + format_real(q.theta);
    case PenaltyKind::Huber: return "huber:eps=" + format_real(q.eps);
    case PenaltyKind::LogSum: return "logsum:eps=" + format_real(q.eps);
    case PenaltyKind::Scad: return "scad:a=" + format_real(q.a) + ",lambda=" + format_real(q.lambda);
    case PenaltyKind::Mcp: return "mcp:a=" + format_real(q.a) + ",lambda=" + format_real(q.lambda);
    case PenaltyKind::HardThresh: return "hardthresh:k=" + std::to_string(q.k);
  }
  return "?";
}

double PenaltySpec::omega_scalar(double w) const {
  const double x = std::abs(w);
  const auto& q = params_;
  switch (kind_) {
    case PenaltyKind::L1:
    case PenaltyKind::Lp:
      return x;
    case PenaltyKind::LpPow:
      return std::pow(x, q.p) / q.p;
    case PenaltyKind::L0:
      return x > 0.0 ? 1.0 : 0.0;
    case PenaltyKind::ElasticNet:
      return 0.5 * q.theta * x * x + (1.0 - q.theta) * x;
    case PenaltyKind::Huber:
      return x <= q.eps ? x * x / (2.0 * q.eps) + 0.5 * q.eps : x;
    case PenaltyKind::LogSum:
      return std::log(x + q.eps);
    case PenaltyKind::Scad: {
      const double lam = q.lambda;
      if (x <= lam) return x;
      if (x <= q.a * lam) return (2.0 * q.a * lam * x - x * x - lam * lam) / (2.0 * (q.a - 1.0) * lam);
      return 0.5 * (q.a + 1.0) * lam;
    }
    case PenaltyKind::Mcp: {
      const double al = q.a * q.lambda;
      return x <= al ? x - x * x / (2.0 * al) : 0.5 * al;
    }
    case PenaltyKind::HardThresh:
      return (q.k >= 1 || x == 0.0) ? 0.0 : kInf;
  }
  return kInf;
}

double PenaltySpec::f_scalar(double eta) const {
  if (std::isnan(eta) || eta < 0.0) return kInf;
  const auto& q = params_;
  switch (kind_) {
    case PenaltyKind::L1:
    case PenaltyKind::Lp:
      return eta;
    case PenaltyKind::LpPow: {
      const double e = dual_exponent(q.p);
      return std::pow(eta, e) / e;
    }
    case PenaltyKind::L0:
      return eta > 0.0 ? 2.0 : 0.0;
    case PenaltyKind::ElasticNet: {
      const double denom = 1.0 - eta * q.theta;
      if (!(denom > 0.0)) return kInf;
      const double c = 1.0 - q.theta;
      return eta * c * c / denom;
    }
    case PenaltyKind::Huber:
      return eta >= q.eps ? eta : kInf;
    case PenaltyKind::LogSum: {
      if (std::isinf(eta)) return kInf;
      const double s = std::sqrt(q.eps * q.eps + 4.0 * eta);
      const double t = s + q.eps;
      // (s - eps)^2 / (4 eta) rewritten as 4 eta / (s + eps)^2 to avoid cancellation.
      return 2.0 * std::log(0.5 * t) - 4.0 * eta / (t * t);
    }
    case PenaltyKind::Scad: {
      const double lam = q.lambda;
      if (eta <= lam) return eta;
      if (std::isinf(eta)) return lam * (q.a + 1.0);
      return lam * ((q.a + 1.0) * eta - lam) / ((q.a - 1.0) * lam + eta);
    }
    case PenaltyKind::Mcp: {
      const double al = q.a * q.lambda;
      if (std::isinf(eta)) return al;
      return al * eta / (eta + al);
    }
    case PenaltyKind::HardThresh:
      return (q.k >= 1 || eta == 0.0) ? 0.0 : kInf;
  }
  return kInf;
}

double PenaltySpec::eta_hat_scalar(double w) const {
  const double x = std::abs(w);
  const auto& q = params_;
  switch (kind_) {
    case PenaltyKind::L1:
    case PenaltyKind::Lp:
      return x;
    case PenaltyKind::LpPow:
      return std::pow(x, 2.0 - q.p);
    case PenaltyKind::L0:
      return x > 0.0 ? kInf : 0.0;
    case PenaltyKind::ElasticNet:
      return x / (x * q.theta + (1.0 - q.theta));
    case PenaltyKind::Huber:
      return std::max(q.eps, x);
    case PenaltyKind::LogSum:
      return x * (x + q.eps);
    case PenaltyKind::Scad: {
      const double lam = q.lambda;
      const double al = q.a * lam;
      if (x <= lam) return x;
      if (x < al) return (q.a - 1.0) * lam * x / (al - x);
      return kInf;
    }
    case PenaltyKind::Mcp: {
      const double al = q.a * q.lambda;
      return x < al ? al * x / (al - x) : kInf;
    }
    case PenaltyKind::HardThresh:
      return q.k >= 1 ? kInf : 0.0;
  }
  return kInf;
}

double PenaltySpec::omega_derivative(double w) const {
  const double x = std::abs(w);
  const double s = sign(w);
  const auto& q = params_;
  switch (kind_) {
    case PenaltyKind::L1:
    case PenaltyKind::Lp:
      return s;
    case PenaltyKind::LpPow:
      return x > 0.0 ? s * std::pow(x, q.p - 1.0) : 0.0;
    case PenaltyKind::L0:
    case PenaltyKind::HardThresh:
      return 0.0;
    case PenaltyKind::ElasticNet:
      return q.theta * w + (1.0 - q.theta) * s;
    case PenaltyKind::Huber:
      return x <= q.eps ? w / q.eps : s;
    case PenaltyKind::LogSum:
      return s / (x + q.eps);
    case PenaltyKind::Scad: {
      const double lam = q.lambda;
      const double al = q.a * lam;
      if (x <= lam) return s;
      if (x <= al) return s * (al - x) / ((q.a - 1.0) * lam);
      return 0.0;
    }
    case PenaltyKind::Mcp: {
      const double al = q.a * q.lambda;
      return x <= al ? s * (1.0 - x / al) : 0.0;
    }
  }
  return 0.0;
}

double PenaltySpec::f_derivative(double eta) const {
  const auto& q = params_;
  switch (kind_) {
    case PenaltyKind::L1:
    case PenaltyKind::Lp:
    case PenaltyKind::Huber:
      return 1.0;
    case PenaltyKind::LpPow:
      return std::pow(eta, dual_exponent(q.p) - 1.0);
    case PenaltyKind::L0:
    case PenaltyKind::HardThresh:
      return 0.0;
    case PenaltyKind::ElasticNet: {
      const double c = 1.0 - q.theta;
      const double denom = 1.0 - eta * q.theta;
      return c * c / (denom * denom);
    }
    case PenaltyKind::LogSum: {
      const double t = std::sqrt(q.eps * q.eps + 4.0 * eta) + q.eps;
      return 4.0 / (t * t);
    }
    case PenaltyKind::Scad: {
      const double lam = q.lambda;
      if (eta <= lam) return 1.0;
      const double denom = (q.a - 1.0) * lam + eta;
      return lam * lam * q.a * q.a / (denom * denom);
    }
    case PenaltyKind::Mcp: {
      const double al = q.a * q.lambda;
      return al * al / ((eta + al) * (eta + al));
    }
  }
  return 0.0;
}

Interval PenaltySpec::eta_domain() const {
  switch (kind_) {
    case PenaltyKind::ElasticNet: return {0.0, 1.0 / params_.theta};
    case PenaltyKind::Huber: return {params_.eps, kInf};
    case PenaltyKind::HardThresh: return params_.k >= 1 ? Interval{0.0, kInf} : Interval{0.0, 0.0};
    default: return {0.0, kInf};
  }
}

double quad_over_eta(double w, double eta) {
  if (std::isinf(eta)) return 0.0;
  if (eta == 0.0) return w == 0.0 ? 0.0 : kInf;
  return w * w / eta;
}

std::vector<Eigen::Index> top_k_indices(const Eigen::VectorXd& w, std::size_t k) {
  const auto d = static_cast<std::size_t>(w.size());
  if (k > d) k = d;
  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto before = [&w](Eigen::Index a, Eigen::Index b) {
    const double wa = std::abs(w[a]);
    const double wb = std::abs(w[b]);
    return wa > wb || (wa == wb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

double lp_norm(const Eigen::VectorXd& v, double p) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::isinf(v[j])) return kInf;
    acc += std::pow(std::abs(v[j]), p);
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace

double omega(const PenaltySpec& spec, const Eigen::VectorXd& w) {
  switch (spec.kind()) {
    case PenaltyKind::Lp:
      return lp_norm(w, spec.params().p);
    case PenaltyKind::HardThresh:
      return static_cast<std::size_t>((w.array() != 0.0).count()) > spec.params().k ? kInf : 0.0;
    default: {
      double total = 0.0;
      for (Eigen::Index j = 0; j < w.size(); ++j) total += spec.omega_scalar(w[j]);
      return total;
    }
  }
}

double f_dual(const PenaltySpec& spec, const EtaVector& eta) {
  if (!eta_in_domain(spec, eta)) return kInf;
  switch (spec.kind()) {
    case PenaltyKind::Lp:
      return lp_norm(eta.values(), dual_exponent(spec.params().p));
    case PenaltyKind::HardThresh:
      return 0.0;
    default: {
      double total = 0.0;
      for (Eigen::Index j = 0; j < eta.size(); ++j) total += spec.f_scalar(eta[j]);
      return total;
    }
  }
}

EtaVector eta_hat(const PenaltySpec& spec, const Eigen::VectorXd& w) {
  const Eigen::Index d = w.size();
  Eigen::VectorXd out(d);
  switch (spec.kind()) {
    case PenaltyKind::Lp: {
      const double p = spec.params().p;
      const double norm = lp_norm(w, p);
      if (norm == 0.0) return EtaVector::constant(d, 0.0);
      const double scale = std::pow(norm, p - 1.0);
      for (Eigen::Index j = 0; j < d; ++j) out[j] = std::pow(std::abs(w[j]), 2.0 - p) * scale;
      break;
    }
    case PenaltyKind::HardThresh: {
      out.setZero();
      for (Eigen::Index j : top_k_indices(w, spec.params().k)) out[j] = kInf;
      break;
    }
    default:
      for (Eigen::Index j = 0; j < d; ++j) out[j] = spec.eta_hat_scalar(w[j]);
  }
  return EtaVector(std::move(out));
}

bool eta_in_domain(const PenaltySpec& spec, const EtaVector& eta) {
  if (spec.kind() == PenaltyKind::HardThresh) {
    return static_cast<std::size_t>(eta.count_nonzero()) <= spec.params().k;
  }
  const Interval h = spec.eta_domain();
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    if (!h.contains(eta[j])) return false;
  }
  return true;
}

double dual_objective(const PenaltySpec& spec, const Eigen::VectorXd& w, const EtaVector& eta) {
  if (w.size() != eta.size()) throw Error(ErrorCode::InvalidParameter, "w and eta sizes differ");
  double quad = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) quad += quad_over_eta(w[j], eta[j]);
  return 0.5 * (quad + f_dual(spec, eta));
}

Eigen::VectorXd omega_gradient(const PenaltySpec& spec, const Eigen::VectorXd& w) {
  const Eigen::Index d = w.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  switch (spec.kind()) {
    case PenaltyKind::HardThresh:
      return g;
    case PenaltyKind::Lp: {
      const double p = spec.params().p;
      const double norm = lp_norm(w, p);
      if (norm == 0.0) return g;
      const double scale = std::pow(norm, 1.0 - p);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (w[j] != 0.0) g[j] = sign(w[j]) * std::pow(std::abs(w[j]), p - 1.0) * scale;
      }
      return g;
    }
    default:
      for (Eigen::Index j = 0; j < d; ++j) g[j] = spec.omega_derivative(w[j]);
      return g;
  }
}

Eigen::VectorXd f_gradient(const PenaltySpec& spec, const EtaVector& eta) {
  const Eigen::Index d = eta.size();
  Eigen::VectorXd g(d);
  if (spec.kind() == PenaltyKind::Lp) {
    const double q = dual_exponent(spec.params().p);
    const double norm = lp_norm(eta.values(), q);
    for (Eigen::Index j = 0; j < d; ++j) {
      g[j] = norm > 0.0 ? std::pow(eta[j], q - 1.0) * std::pow(norm, 1.0 - q) : 0.0;
    }
    return g;
  }
  for (Eigen::Index j = 0; j < d; ++j) g[j] = spec.f_derivative(eta[j]);
  return g;
}

}  // namespace dropreg
