#include "dropreg/regularizer.hpp"

#include <cmath>

#include "dropreg/error.hpp"
#include "dropreg/spec_string.hpp"

namespace dropreg {

class Regularizer::Model {
 public:
  virtual ~Model() = default;
  virtual std::string name() const = 0;
  virtual double omega(const Eigen::VectorXd& w, Progress progress) const = 0;
  virtual EtaVector eta_hat(const Eigen::VectorXd& w, Progress progress) const = 0;
  virtual Eigen::VectorXd omega_gradient(const Eigen::VectorXd& w) const {
    const EtaVector eta = eta_hat(w, {});
    Eigen::VectorXd g(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      g[j] = (w[j] == 0.0 || std::isinf(eta[j])) ? 0.0 : w[j] / eta[j];
    }
    return g;
  }
  virtual bool has_smooth_dual() const { return false; }
  virtual double f(const EtaVector&) const {
    throw Error(ErrorCode::InvalidCombination, name() + " has no differentiable dual");
  }
  virtual Eigen::VectorXd f_gradient(const EtaVector&) const {
    throw Error(ErrorCode::InvalidCombination, name() + " has no differentiable dual");
  }
  virtual Interval eta_domain() const { return {0.0, kInf}; }
  virtual const PenaltySpec* penalty() const { return nullptr; }
  virtual const MethodSpec* method() const { return nullptr; }
};

namespace {

class PenaltyModel final : public Regularizer::Model {
 public:
  explicit PenaltyModel(const PenaltySpec& spec) : spec_(spec) {}

  std::string name() const override { return spec_.to_string(); }
  double omega(const Eigen::VectorXd& w, Progress) const override { return dropreg::omega(spec_, w); }
  EtaVector eta_hat(const Eigen::VectorXd& w, Progress) const override {
    return dropreg::eta_hat(spec_, w);
  }
  Eigen::VectorXd omega_gradient(const Eigen::VectorXd& w) const override {
    return dropreg::omega_gradient(spec_, w);
  }
  bool has_smooth_dual() const override {
    return spec_.kind() != PenaltyKind::L0 && spec_.kind() != PenaltyKind::HardThresh;
  }
  double f(const EtaVector& eta) const override { return f_dual(spec_, eta); }
  Eigen::VectorXd f_gradient(const EtaVector& eta) const override {
    return dropreg::f_gradient(spec_, eta);
  }
  Interval eta_domain() const override { return spec_.eta_domain(); }
  const PenaltySpec* penalty() const override { return &spec_; }

 private:
  PenaltySpec spec_;
};

// Separable effective penalties evaluated through their tabulated duals.
class EffectiveModel final : public Regularizer::Model {
 public:
  EffectiveModel(const MethodSpec& method, const EffectivePenaltyOptions& opts)
      : method_(method), penalty_(method, opts) {}

  std::string name() const override { return method_.to_string(); }
  double omega(const Eigen::VectorXd& w, Progress) const override {
    double total = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) total += penalty_(std::abs(w[j]));
    return total;
  }
  EtaVector eta_hat(const Eigen::VectorXd& w, Progress) const override {
    Eigen::VectorXd eta(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) eta[j] = penalty_.minimize(std::abs(w[j])).argmin;
    return EtaVector(std::move(eta));
  }
  Eigen::VectorXd omega_gradient(const Eigen::VectorXd& w) const override {
    if (method_.kind != MethodKind::Standout) return Model::omega_gradient(w);
    const double scale = method_.w2 * method_.w2 / method_.lambda;
    Eigen::VectorXd g(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const double z = std::abs(w[j]);
      g[j] = std::copysign(scale * z * std::exp(-z), w[j]);
    }
    return g;
  }
  bool has_smooth_dual() const override { return method_.kind == MethodKind::VariationalDropout; }
  double f(const EtaVector& eta) const override {
    if (!has_smooth_dual()) return Model::f(eta);
    double total = 0.0;
    for (Eigen::Index j = 0; j < eta.size(); ++j) total += vardrop_f(eta[j], method_.lambda);
    return total;
  }
  Eigen::VectorXd f_gradient(const EtaVector& eta) const override {
    if (!has_smooth_dual()) return Model::f_gradient(eta);
    Eigen::VectorXd g(eta.size());
    for (Eigen::Index j = 0; j < eta.size(); ++j) g[j] = vardrop_f_derivative(eta[j], method_.lambda);
    return g;
  }
  const MethodSpec* method() const override { return &method_; }

 private:
  MethodSpec method_;
  EffectivePenalty penalty_;
};

class PruningModel final : public Regularizer::Model {
 public:
  explicit PruningModel(const MethodSpec& method) : method_(method) {}

  std::string name() const override { return method_.to_string(); }
  double omega(const Eigen::VectorXd& w, Progress progress) const override {
    return dropreg::omega(PenaltySpec::hard_thresh(k_at(w.size(), progress)), w);
  }
  EtaVector eta_hat(const Eigen::VectorXd& w, Progress progress) const override {
    return magnitude_pruning_eta_hat(w, k_at(w.size(), progress));
  }
  Eigen::VectorXd omega_gradient(const Eigen::VectorXd& w) const override {
    return Eigen::VectorXd::Zero(w.size());
  }
  const MethodSpec* method() const override { return &method_; }

 private:
  std::size_t k_at(Eigen::Index d, Progress progress) const {
    const auto dim = static_cast<std::size_t>(d);
    if (method_.k > dim) throw Error(ErrorCode::InvalidParameter, "magprune k exceeds dimension");
    if (method_.steps == 0) return method_.k;
    return pruning_schedule(progress.t, method_.steps, method_.k, dim);
  }

  MethodSpec method_;
};

}  // namespace

Regularizer::Regularizer(const PenaltySpec& spec)
    : model_(std::make_shared<PenaltyModel>(spec)) {}

Regularizer Regularizer::from_method(const MethodSpec& method, const EffectivePenaltyOptions& opts) {
  if (method.kind == MethodKind::MagnitudePruning) {
    return Regularizer(std::make_shared<PruningModel>(method));
  }
  return Regularizer(std::make_shared<EffectiveModel>(method, opts));
}

Regularizer Regularizer::parse(std::string_view text) {
  const SpecString parts = parse_spec_string(text);
  if (is_method_name(parts.name)) return from_method(parse_method(text));
  return Regularizer(parse_penalty(text));
}

std::string Regularizer::name() const { return model_->name(); }
double Regularizer::omega(const Eigen::VectorXd& w, Progress progress) const {
  return model_->omega(w, progress);
}
EtaVector Regularizer::eta_hat(const Eigen::VectorXd& w, Progress progress) const {
  return model_->eta_hat(w, progress);
}
Eigen::VectorXd Regularizer::omega_gradient(const Eigen::VectorXd& w) const {
  return model_->omega_gradient(w);
}
bool Regularizer::has_smooth_dual() const { return model_->has_smooth_dual(); }
double Regularizer::f(const EtaVector& eta) const { return model_->f(eta); }
Eigen::VectorXd Regularizer::f_gradient(const EtaVector& eta) const { return model_->f_gradient(eta); }
Interval Regularizer::eta_domain() const { return model_->eta_domain(); }
const PenaltySpec* Regularizer::penalty() const { return model_->penalty(); }
const MethodSpec* Regularizer::method() const { return model_->method(); }

}  // namespace dropreg
