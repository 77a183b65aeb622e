#include "dropreg/duality.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dropreg/error.hpp"

namespace dropreg {
namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct Extremum {
  double x;
  double value;
};

// Golden-section minimization of fn on [a, b] down to an interval of width tol.
template <class Fn>
Extremum golden_min(const Fn& fn, double a, double b, double tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  for (int it = 0; it < 300 && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  return fc <= fd ? Extremum{c, fc} : Extremum{d, fd};
}

double clean(double v) { return std::isnan(v) ? kInf : v; }

double half_objective(double w, double eta, double fv) {
  return 0.5 * (quad_over_eta(w, eta) + clean(fv));
}

}  // namespace

void Minimize1DOptions::validate() const {
  if (!(grid_lo > 0.0) || !(grid_lo < grid_hi) || !std::isfinite(grid_hi)) {
    throw Error(ErrorCode::InvalidParameter, "minimizer bracket needs 0 < grid_lo < grid_hi < inf");
  }
  if (grid_points < 64) throw Error(ErrorCode::InvalidParameter, "grid_points must be >= 64");
  if (!(refine_tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "refine_tol must be > 0");
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::InvalidParameter, "log_grid needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

TabulatedDual::TabulatedDual(const ScalarFn& f, Interval domain, const Minimize1DOptions& opts) {
  opts.validate();
  const double lo = std::max(domain.lo, opts.grid_lo);
  const double hi = std::min(domain.hi, opts.grid_hi);
  if (domain.empty() || lo > hi) {
    throw Error(ErrorCode::EmptyDomain, "eta domain does not meet the search bracket");
  }
  eta_of_t_ = [lo, hi](double t) { return std::clamp(std::exp(t), lo, hi); };
  f_of_t_ = [f, lo, hi](double t) { return f(std::clamp(std::exp(t), lo, hi)); };
  refine_tol_ = opts.refine_tol;
  const int points = lo == hi ? 1 : opts.grid_points;
  t_.resize(static_cast<std::size_t>(points));
  const double tl = std::log(lo);
  const double th = std::log(hi);
  for (int i = 0; i < points; ++i) {
    t_[static_cast<std::size_t>(i)] = points == 1 ? tl : tl + (th - tl) * i / (points - 1);
  }
  tabulate(points);
  eta_.front() = lo;
  eta_.back() = hi;
  if (domain.lo == 0.0) {
    has_zero_ = true;
    f_zero_ = f(0.0);
  }
  if (std::isinf(domain.hi)) {
    has_inf_ = true;
    f_inf_ = f(kInf);
  }
}

TabulatedDual TabulatedDual::parametric(std::function<double(double)> eta_of_t,
                                        std::function<double(double)> f_of_t, double t_lo,
                                        double t_hi, const Minimize1DOptions& opts) {
  opts.validate();
  if (!(t_lo < t_hi)) throw Error(ErrorCode::EmptyDomain, "parametric range is empty");
  TabulatedDual out;
  out.eta_of_t_ = std::move(eta_of_t);
  out.f_of_t_ = std::move(f_of_t);
  out.refine_tol_ = opts.refine_tol;
  out.t_.resize(static_cast<std::size_t>(opts.grid_points));
  for (int i = 0; i < opts.grid_points; ++i) {
    out.t_[static_cast<std::size_t>(i)] = t_lo + (t_hi - t_lo) * i / (opts.grid_points - 1);
  }
  out.tabulate(opts.grid_points);
  return out;
}

void TabulatedDual::tabulate(int points) {
  eta_.resize(static_cast<std::size_t>(points));
  f_.resize(static_cast<std::size_t>(points));
  for (std::size_t i = 0; i < t_.size(); ++i) {
    eta_[i] = eta_of_t_(t_[i]);
    f_[i] = f_of_t_(t_[i]);
  }
}

MinimizeResult TabulatedDual::minimize(double w) const {
  const std::size_t n = t_.size();
  std::size_t best = 0;
  double best_value = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = half_objective(w, eta_[i], f_[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }

  MinimizeResult out{best_value, eta_[best], false};
  if (n == 1) {
    out.boundary = true;
  } else if (best == n - 1) {
    out.boundary = true;
    if (has_inf_) {
      if (std::isnan(f_inf_)) {
        // f(+inf) is an indeterminate form; the decreasing tail marks the limit.
        out.argmin = kInf;
      } else if (const double v = 0.5 * f_inf_; v <= best_value) {
        out = {v, kInf, true};
      }
    }
  } else if (best == 0) {
    out.boundary = true;
    if (has_zero_) {
      if (const double v = half_objective(w, 0.0, f_zero_); v <= best_value) out = {v, 0.0, true};
    }
  } else {
    auto objective = [&](double t) { return half_objective(w, eta_of_t_(t), f_of_t_(t)); };
    const Extremum r = golden_min(objective, t_[best - 1], t_[best + 1], refine_tol_);
    if (r.value < out.value) out = {r.value, eta_of_t_(r.x), false};
  }

  // Sentinel ends can still win when the grid minimum is interior.
  if (has_zero_ && !out.boundary) {
    if (const double v = half_objective(w, 0.0, f_zero_); v < out.value) out = {v, 0.0, true};
  }
  if (has_inf_ && !out.boundary && !std::isnan(f_inf_)) {
    if (const double v = 0.5 * f_inf_; v < out.value) out = {v, kInf, true};
  }
  return out;
}

MinimizeResult omega_from_f(const ScalarFn& f, Interval domain, double w,
                            const Minimize1DOptions& opts) {
  return TabulatedDual(f, domain, opts).minimize(w);
}

ConjugateResult f_from_omega(const ScalarFn& omega_fn, double eta, const Minimize1DOptions& opts) {
  opts.validate();
  if (std::isnan(eta) || eta < 0.0) return {kInf, true, true};
  if (eta == 0.0) eta = opts.grid_lo;
  const double inv = 1.0 / eta;
  auto phi = [&](double u) {
    const double g = omega_fn(std::sqrt(u));
    if (std::isinf(g)) return g;
    return 2.0 * g - u * inv;
  };

  ConjugateResult out;
  {
    const std::vector<double> probe = log_grid(std::max(opts.grid_lo, 1e-4),
                                               std::min(opts.grid_hi, 1e4), 64);
    std::vector<double> u(probe.size());
    std::transform(probe.begin(), probe.end(), u.begin(), [](double s) { return s * s; });
    out.reliable = subquadratic_check(omega_fn, u).ok;
  }

  const std::vector<double> s = log_grid(opts.grid_lo, opts.grid_hi, opts.grid_points);
  std::vector<double> values(s.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    values[i] = phi(s[i] * s[i]);
    if (values[i] > values[best]) best = i;
  }
  const double v_best = values[best];
  const double phi0 = phi(0.0);
  const std::size_t n = s.size();

  if (std::isinf(v_best) && v_best > 0.0) return {kInf, false, out.reliable};
  if (best == n - 1 && values[n - 1] > values[n - 2]) {
    out.value = kInf;
    return out;
  }

  if (phi0 >= v_best) {
    // The supremum is at u = 0. A strictly falling start means eta is outside H.
    const double resolve = 1e-8 * std::max(1.0, std::abs(phi0));
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(values[k] - phi0) > resolve) {
        // A linear fall from u = 0 keeps its slope at half the distance; a
        // plateau followed by a later fall does not.
        const double u = s[k] * s[k];
        const double slope = (values[k] - phi0) / u;
        const double slope_half = (phi(0.5 * u) - phi0) / (0.5 * u);
        if (slope < -1e-6 * inv && slope_half < 0.5 * slope) return {kInf, true, out.reliable};
        break;
      }
    }
    out.value = phi0;
    return out;
  }

  out.value = v_best;
  if (best > 0 && best + 1 < n) {
    auto neg = [&](double log_s) {
      const double sv = std::exp(log_s);
      return -phi(sv * sv);
    };
    const Extremum r =
        golden_min(neg, std::log(s[best - 1]), std::log(s[best + 1]), opts.refine_tol);
    out.value = std::max(out.value, -r.value);
  }
  return out;
}

double omega_from_eta_hat(const ScalarFn& eta_hat_fn, double w, double anchor,
                          double anchor_value, const QuadratureOptions& opts) {
  if (!std::isfinite(w) || !(anchor >= 0.0) || !std::isfinite(anchor)) {
    throw Error(ErrorCode::InvalidParameter, "omega_from_eta_hat needs finite w and anchor >= 0");
  }
  const double lo = std::sqrt(anchor);
  const double hi = std::abs(w);
  if (lo == hi) return anchor_value;

  const double a = std::min(lo, hi);
  const double b = std::max(lo, hi);
  constexpr int kScan = 64;
  double prev = eta_hat_fn(a);
  for (int i = 1; i < kScan; ++i) {
    const double s = a + (b - a) * i / (kScan - 1);
    const double cur = eta_hat_fn(s);
    if (std::isnan(cur) || cur < 0.0 || cur < prev - 1e-12 * std::abs(prev)) {
      throw Error(ErrorCode::NonMonotoneUpdate,
                  "eta_hat is not nondecreasing on the integration range");
    }
    prev = cur;
  }

  auto integrand = [&eta_hat_fn](double s) {
    const double e = eta_hat_fn(s);
    if (std::isinf(e)) return 0.0;
    return s / e;
  };
  return anchor_value + quad_adaptive(integrand, lo, hi, opts);
}

double eta_hat_from_omega(const ScalarFn& omega_fn, double w, double fd_step) {
  const double u = w * w;
  const double h = fd_step > 0.0 ? fd_step : std::max(1e-6, 1e-6 * u);
  auto g = [&omega_fn](double x) { return omega_fn(std::sqrt(x)); };
  const double deriv = u - h >= 0.0 ? (g(u + h) - g(u - h)) / (2.0 * h) : (g(u + h) - g(u)) / h;
  if (!(deriv > 0.0)) return kInf;
  return 1.0 / (2.0 * deriv);
}

SubquadraticReport subquadratic_check(const ScalarFn& omega_fn, const std::vector<double>& u_grid,
                                      double tol) {
  SubquadraticReport out;
  if (u_grid.size() < 3) return out;
  std::vector<double> g(u_grid.size());
  for (std::size_t i = 0; i < u_grid.size(); ++i) g[i] = omega_fn(std::sqrt(u_grid[i]));
  for (std::size_t i = 1; i + 1 < u_grid.size(); ++i) {
    const double h0 = u_grid[i] - u_grid[i - 1];
    const double h1 = u_grid[i + 1] - u_grid[i];
    if (!(h0 > 0.0) || !(h1 > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "u_grid must be strictly increasing");
    }
    const double m0 = (g[i] - g[i - 1]) / h0;
    const double m1 = (g[i + 1] - g[i]) / h1;
    double second = (m1 - m0) * 0.5 * (h0 + h1);
    if (std::isnan(second)) second = kInf;
    if (second > out.worst_violation) {
      out.worst_violation = second;
      out.worst_u = u_grid[i];
    }
  }
  out.ok = out.worst_violation <= tol;
  return out;
}

namespace {

double deviation(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b);
}

void check_scalar(const PenaltySpec& spec, const std::vector<double>& w_grid,
                  const DualCheckOptions& opts, DualCheckReport& rep) {
  const double shift = opts.f_shift;
  const Interval h = spec.eta_domain();
  ScalarFn f("f", h, [spec, shift](double eta) { return spec.f_scalar(eta) + shift; });
  const TabulatedDual dual(f, h, opts.minimize);
  const double lo = 10.0 * opts.minimize.grid_lo;
  const double hi = opts.minimize.grid_hi / 10.0;
  for (double w : w_grid) {
    const MinimizeResult r = dual.minimize(w);
    rep.max_omega_dev = std::max(rep.max_omega_dev, deviation(spec.omega_scalar(w), r.value));
    ++rep.points;
    const double eh = spec.eta_hat_scalar(w);
    if (std::isfinite(eh) && eh >= lo && eh <= hi) {
      rep.max_argmin_rel_dev = std::max(rep.max_argmin_rel_dev, std::abs(r.argmin - eh) / eh);
      ++rep.argmin_points;
    }
  }
}

std::vector<Eigen::VectorXd> probe_vectors(const std::vector<double>& w_grid, int dim,
                                           bool with_zeros) {
  std::vector<Eigen::VectorXd> out;
  const std::size_t m = w_grid.size();
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) {
      const double mag = w_grid[(i + static_cast<std::size_t>(j) * 7) % m];
      v[j] = (j % 2 == 0 ? 1.0 : -1.0) * mag;
    }
    out.push_back(v);
    if (with_zeros) {
      for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd z = v;
        z[(static_cast<int>(i) + j) % dim] = 0.0;
        out.push_back(z);
        if (dim > 2) {
          z[(static_cast<int>(i) + j + 1) % dim] = 0.0;
          out.push_back(z);
        }
      }
    }
  }
  return out;
}

void check_hard_thresh(const PenaltySpec& spec, const std::vector<double>& w_grid,
                       const DualCheckOptions& opts, DualCheckReport& rep) {
  const int d = opts.dim;
  const std::size_t k = spec.params().k;
  for (const Eigen::VectorXd& w : probe_vectors(w_grid, d, true)) {
    double best = kInf;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) > k) continue;
      double quad = 0.0;
      for (int j = 0; j < d; ++j) quad += quad_over_eta(w[j], (mask >> j) & 1u ? kInf : 0.0);
      best = std::min(best, 0.5 * (quad + opts.f_shift));
    }
    rep.max_omega_dev = std::max(rep.max_omega_dev, deviation(omega(spec, w), best));
    const double at_hat = dual_objective(spec, w, eta_hat(spec, w)) + 0.5 * opts.f_shift;
    rep.max_argmin_rel_dev = std::max(rep.max_argmin_rel_dev, deviation(at_hat, best));
    ++rep.points;
    ++rep.argmin_points;
  }
}

void check_lp_vector(const PenaltySpec& spec, const std::vector<double>& w_grid,
                     const DualCheckOptions& opts, DualCheckReport& rep) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (const Eigen::VectorXd& w : probe_vectors(w_grid, opts.dim, false)) {
    const double om = omega(spec, w);
    const EtaVector eh = eta_hat(spec, w);
    const double at_hat = dual_objective(spec, w, eh) + 0.5 * opts.f_shift;
    rep.max_omega_dev = std::max(rep.max_omega_dev, deviation(om, at_hat));
    for (int r = 0; r < 8; ++r) {
      Eigen::VectorXd pert = eh.values();
      for (Eigen::Index j = 0; j < pert.size(); ++j) pert[j] *= std::exp(normal(rng));
      const double other = dual_objective(spec, w, EtaVector(pert)) + 0.5 * opts.f_shift;
      if (other < om) rep.max_omega_dev = std::max(rep.max_omega_dev, om - other);
    }
    ++rep.points;
  }
}

}  // namespace

DualCheckReport check_dual_pair(const PenaltySpec& spec, const std::vector<double>& w_grid,
                                const DualCheckOptions& opts) {
  DualCheckReport rep;
  rep.penalty = spec.to_string();
  switch (spec.kind()) {
    case PenaltyKind::HardThresh:
      check_hard_thresh(spec, w_grid, opts, rep);
      break;
    case PenaltyKind::Lp:
      check_scalar(spec, w_grid, opts, rep);
      check_lp_vector(spec, w_grid, opts, rep);
      break;
    default:
      check_scalar(spec, w_grid, opts, rep);
  }
  rep.passed = rep.max_omega_dev <= opts.omega_tol && rep.max_argmin_rel_dev <= opts.argmin_tol;
  return rep;
}

}  // namespace dropreg
