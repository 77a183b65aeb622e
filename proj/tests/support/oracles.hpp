#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "dropreg/dropout.hpp"
#include "dropreg/problem.hpp"
#include "dropreg/scalar_fn.hpp"

namespace oracle {

using Fn = std::function<double(double)>;

/// Composite Gauss-Legendre with `order` nodes on each of `panels` equal panels.
double gauss_legendre(const Fn& fn, double lo, double hi, int panels, int order = 20);

/// Composite Simpson with 2 * half_panels subintervals.
double simpson(const Fn& fn, double lo, double hi, int half_panels);

/// exp(-u^2) int_0^u exp(t^2) dt, integrating exp(t^2 - u^2) directly.
double dawson(double u);

/// int_0^eta F(sqrt(t/2)) / sqrt(2t) dt after t = s^2, using the Dawson oracle.
double kl_loguniform(double eta_bar);

/// min over a dense log grid of eta in [lo, hi] of (1/2)(w^2/eta + f(eta)),
/// with eta = +inf also tried when include_inf is set.
struct GridMin {
  double value;
  double argmin;
};
GridMin grid_minimize(const Fn& f, double w, double lo, double hi, int points, bool include_inf);

/// Mean of n draws from the mask model together with its standard error.
struct SampleStats {
  double mean;
  double std_error;
};
SampleStats mask_sample_stats(const dropreg::MaskModel& model, int n, unsigned long long seed,
                              int power = 1);

/// Standard-normal X (standardized) and y = X w + noise, for seeded tests.
dropreg::Problem random_problem(int n, int d, unsigned long long seed, double noise = 0.1,
                                int k = -1);

}  // namespace oracle
