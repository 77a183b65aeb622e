#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "dropreg/dropout.hpp"
#include "dropreg/penalty.hpp"

namespace dropreg {

/// Position in a run, for regularizers that change over time (a pruning
/// schedule). t counts completed iterations after the update, 1..T.
struct Progress {
  std::size_t t = 0;
  std::size_t T = 0;
};

/// A penalty the solvers can use: either a closed-form zoo penalty or the
/// effective penalty of a dropout method.
class Regularizer {
 public:
  class Model;

  Regularizer(const PenaltySpec& spec);  // NOLINT(google-explicit-constructor)
  static Regularizer from_method(const MethodSpec& method, const EffectivePenaltyOptions& opts = {});
  /// Accepts either grammar ("logsum:eps=2" or "vardrop:lambda=1").
  static Regularizer parse(std::string_view text);

  std::string name() const;
  double omega(const Eigen::VectorXd& w, Progress progress = {}) const;
  EtaVector eta_hat(const Eigen::VectorXd& w, Progress progress = {}) const;
  /// Closed form where one exists, else the envelope gradient w / eta_hat(w).
  Eigen::VectorXd omega_gradient(const Eigen::VectorXd& w) const;

  /// Whether f is differentiable on the interior of H (required by joint_gd).
  bool has_smooth_dual() const;
  double f(const EtaVector& eta) const;
  Eigen::VectorXd f_gradient(const EtaVector& eta) const;
  /// Per-coordinate eta domain, used to project joint_gd iterates.
  Interval eta_domain() const;

  const PenaltySpec* penalty() const;
  const MethodSpec* method() const;

 private:
  explicit Regularizer(std::shared_ptr<const Model> model) : model_(std::move(model)) {}

  std::shared_ptr<const Model> model_;
};

}  // namespace dropreg
