#pragma once

#include <functional>

#include "dropreg/scalar_fn.hpp"

namespace dropreg {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 40;
};

/// Adaptive Simpson quadrature of fn over [lo, hi].
///
/// An endpoint where fn is not finite is treated as an integrable
/// square-root-type singularity: the half interval next to it is mapped
/// through t = endpoint +/- tau^2, which removes 1/sqrt singularities.
/// Throws Error(DepthExceeded) when a subinterval fails to converge
/// within opts.max_depth bisections.
double quad_adaptive(const std::function<double(double)>& fn, double lo, double hi,
                     const QuadratureOptions& opts = {});

double quad_adaptive(const ScalarFn& fn, double lo, double hi,
                     const QuadratureOptions& opts = {});

}  // namespace dropreg
