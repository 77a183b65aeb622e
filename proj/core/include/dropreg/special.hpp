#pragma once

#include "dropreg/quadrature.hpp"

namespace dropreg {

/// Dawson's integral F(u) = exp(-u^2) * int_0^u exp(t^2) dt.
/// Odd in u; absolute accuracy better than 1e-12 on |u| <= 50.
double dawson(double u);

/// Integrand of the log-uniform KL term, F(sqrt(t/2)) / sqrt(2 t).
/// Takes its analytic limit 1/2 at t = 0.
double kl_loguniform_integrand(double t);

/// KL divergence between the Gaussian-dropout posterior and the log-uniform
/// prior as a function of the rescaled precision eta_bar:
///   int_0^eta_bar F(sqrt(t/2)) / sqrt(2 t) dt.
/// Grows like log(eta_bar)/2 for large arguments; +inf maps to +inf.
double kl_loguniform(double eta_bar, const QuadratureOptions& opts = {});

}  // namespace dropreg
