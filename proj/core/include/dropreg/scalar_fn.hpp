#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>

namespace dropreg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi] on the extended real line.
struct Interval {
  double lo = 0.0;
  double hi = kInf;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool empty() const { return !(lo <= hi); }
  Interval intersect(const Interval& other) const {
    return {lo > other.lo ? lo : other.lo, hi < other.hi ? hi : other.hi};
  }
};

/// A named real function with a declared domain. Evaluates to +inf outside it.
class ScalarFn {
 public:
  using Fn = std::function<double(double)>;

  ScalarFn(std::string name, Interval domain, Fn fn)
      : name_(std::move(name)), domain_(domain), fn_(std::move(fn)) {}

  double operator()(double x) const { return domain_.contains(x) ? fn_(x) : kInf; }

  const std::string& name() const { return name_; }
  const Interval& domain() const { return domain_; }

 private:
  std::string name_;
  Interval domain_;
  Fn fn_;
};

}  // namespace dropreg
