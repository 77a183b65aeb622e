#include "dropreg/quadrature.hpp"

#include <cmath>
#include <limits>

#include "dropreg/error.hpp"

namespace dropreg {
namespace {

using Fn = std::function<double(double)>;

struct SimpsonPanel {
  double a, fa, m, fm, b, fb, whole;
};

double sample(const Fn& fn, double x) {
  const double v = fn(x);
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::InvalidParameter,
                "integrand is not finite at interior point " + std::to_string(x));
  }
  return v;
}

double simpson_recurse(const Fn& fn, const SimpsonPanel& p, double tol, int depth,
                       int max_depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = sample(fn, lm);
  const double frm = sample(fn, rm);
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;

  // Panels too narrow to split further are accepted as-is.
  if (lm <= p.a || rm >= p.b) return left + right;
  if (depth >= 2 && std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= max_depth) {
    throw Error(ErrorCode::DepthExceeded,
                "adaptive Simpson did not converge on [" + std::to_string(p.a) + ", " +
                    std::to_string(p.b) + "]");
  }
  return simpson_recurse(fn, {p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth + 1,
                         max_depth) +
         simpson_recurse(fn, {p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth + 1,
                         max_depth);
}

double simpson_regular(const Fn& fn, double a, double fa, double b, double fb, double tol,
                       int max_depth) {
  const double m = 0.5 * (a + b);
  const double fm = sample(fn, m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(fn, {a, fa, m, fm, b, fb, whole}, tol, 0, max_depth);
}

// Integral over [e, e + side * len] with a singular value at e, via t = e + side * tau^2.
double simpson_singular_end(const Fn& fn, double e, double side, double len, double tol,
                            int max_depth) {
  const double tau_max = std::sqrt(len);
  Fn mapped = [&](double tau) { return 2.0 * tau * fn(e + side * tau * tau); };
  // The mapped integrand is bounded at tau = 0; extrapolate its limit
  // linearly from two samples just inside.
  double tau_eps = 1e-8 * tau_max;
  const double min_shift = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(e);
  if (tau_eps * tau_eps < min_shift) tau_eps = std::sqrt(min_shift);
  const double f0 = 2.0 * mapped(tau_eps) - mapped(2.0 * tau_eps);
  const double f1 = sample(mapped, tau_max);
  if (!std::isfinite(f0)) {
    throw Error(ErrorCode::InvalidParameter,
                "endpoint singularity at " + std::to_string(e) + " is not integrable");
  }
  return simpson_regular(mapped, 0.0, f0, tau_max, f1, tol, max_depth);
}

}  // namespace

double quad_adaptive(const Fn& fn, double lo, double hi, const QuadratureOptions& opts) {
  if (!(opts.abs_tol > 0.0) || opts.max_depth < 1) {
    throw Error(ErrorCode::InvalidParameter, "quadrature needs abs_tol > 0 and max_depth >= 1");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidParameter, "quadrature bounds must be finite");
  }
  if (lo == hi) return 0.0;
  if (lo > hi) return -quad_adaptive(fn, hi, lo, opts);

  const double flo = fn(lo);
  const double fhi = fn(hi);
  const bool lo_singular = !std::isfinite(flo);
  const bool hi_singular = !std::isfinite(fhi);
  if (!lo_singular && !hi_singular) {
    return simpson_regular(fn, lo, flo, hi, fhi, opts.abs_tol, opts.max_depth);
  }

  const double mid = 0.5 * (lo + hi);
  const double fmid = sample(fn, mid);
  const double half_tol = 0.5 * opts.abs_tol;
  const double left =
      lo_singular ? simpson_singular_end(fn, lo, +1.0, mid - lo, half_tol, opts.max_depth)
                  : simpson_regular(fn, lo, flo, mid, fmid, half_tol, opts.max_depth);
  const double right =
      hi_singular ? simpson_singular_end(fn, hi, -1.0, hi - mid, half_tol, opts.max_depth)
                  : simpson_regular(fn, mid, fmid, hi, fhi, half_tol, opts.max_depth);
  return left + right;
}

double quad_adaptive(const ScalarFn& fn, double lo, double hi, const QuadratureOptions& opts) {
  return quad_adaptive(Fn([&fn](double x) { return fn(x); }), lo, hi, opts);
}

}  // namespace dropreg
