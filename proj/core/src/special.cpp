#include "dropreg/special.hpp"

#include <cmath>
#include <limits>

#include "dropreg/error.hpp"

namespace dropreg {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Alternating Maclaurin series, sum_n (-2u^2)^n u / (2n+1)!!. Used for |u| <= 1.
double dawson_maclaurin(double u) {
  const double x2 = u * u;
  double term = u;
  double sum = u;
  for (int n = 1; n < 100; ++n) {
    term *= -2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (std::abs(term) < 0.25 * kEps * std::abs(sum)) break;
  }
  return sum;
}

// exp(-u^2) * sum_n u^(2n+1) / (n! (2n+1)). All terms positive, so no
// cancellation; used for 1 < |u| < 6.
double dawson_positive_series(double u) {
  const double x2 = u * u;
  double power = u;  // u^(2n+1) / n!
  double sum = u;
  for (int n = 1; n < 400; ++n) {
    power *= x2 / n;
    const double term = power / (2.0 * n + 1.0);
    sum += term;
    if (term < 0.25 * kEps * sum) break;
  }
  return std::exp(-x2) * sum;
}

// Asymptotic expansion (1/2u) sum_n (2n-1)!! / (2u^2)^n, truncated at its
// smallest term. Used for |u| >= 6, where that term is below 1e-15.
double dawson_asymptotic(double u) {
  const double inv = 1.0 / (2.0 * u * u);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    const double next = term * (2.0 * n - 1.0) * inv;
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < 0.25 * kEps * sum) break;
  }
  return sum / (2.0 * u);
}

}  // namespace

double dawson(double u) {
  if (std::isnan(u)) return u;
  const double a = std::abs(u);
  double value;
  if (a <= 1.0) {
    value = dawson_maclaurin(a);
  } else if (a < 6.0) {
    value = dawson_positive_series(a);
  } else if (std::isinf(a)) {
    value = 0.0;
  } else {
    value = dawson_asymptotic(a);
  }
  return u < 0.0 ? -value : value;
}

double kl_loguniform_integrand(double t) {
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return 0.0;
  return dawson(std::sqrt(0.5 * t)) / std::sqrt(2.0 * t);
}

double kl_loguniform(double eta_bar, const QuadratureOptions& opts) {
  if (std::isnan(eta_bar) || eta_bar < 0.0) {
    throw Error(ErrorCode::InvalidParameter, "kl_loguniform needs eta_bar >= 0");
  }
  if (eta_bar == 0.0) return 0.0;
  if (std::isinf(eta_bar)) return kInf;

  // [0, 1] directly; beyond 1 in log-time, where the integrand times t tends to 1/2.
  const double head_end = eta_bar < 1.0 ? eta_bar : 1.0;
  QuadratureOptions half = opts;
  half.abs_tol = 0.5 * opts.abs_tol;
  double total = quad_adaptive(kl_loguniform_integrand, 0.0, head_end, half);
  if (eta_bar > 1.0) {
    total += quad_adaptive(
        [](double s) {
          const double t = std::exp(s);
          return kl_loguniform_integrand(t) * t;
        },
        0.0, std::log(eta_bar), half);
  }
  return total;
}

}  // namespace dropreg
