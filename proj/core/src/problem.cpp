#include "dropreg/problem.hpp"

#include <cmath>
#include <string>

#include "dropreg/dropout.hpp"
#include "dropreg/error.hpp"

namespace dropreg {

void Problem::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw Error(ErrorCode::InvalidParameter, "problem needs n, d >= 1");
  if (y.size() != X.rows()) throw Error(ErrorCode::InvalidParameter, "y length must equal rows of X");
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidParameter, "problem data must be finite");
}

void Problem::require_standardized(double tol) const { dropreg::require_standardized(X, tol); }

Standardized standardize(const Eigen::MatrixXd& X_raw) {
  if (X_raw.rows() < 1 || X_raw.cols() < 1) {
    throw Error(ErrorCode::InvalidParameter, "standardize needs a non-empty matrix");
  }
  const double n = static_cast<double>(X_raw.rows());
  Standardized out{X_raw, Eigen::VectorXd(X_raw.cols())};
  for (Eigen::Index j = 0; j < X_raw.cols(); ++j) {
    const double rms = std::sqrt(X_raw.col(j).squaredNorm() / n);
    if (!(rms > 0.0) || !std::isfinite(rms)) {
      throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " has zero mean square");
    }
    out.scales[j] = rms;
    out.X.col(j) /= rms;
  }
  return out;
}

Eigen::VectorXd unstandardize_weights(const Eigen::VectorXd& w_std, const Eigen::VectorXd& scales) {
  if (w_std.size() != scales.size()) {
    throw Error(ErrorCode::InvalidParameter, "weights and scales sizes differ");
  }
  return w_std.cwiseQuotient(scales);
}

Gram::Gram(const Problem& problem) {
  problem.validate();
  const double n = static_cast<double>(problem.n());
  G = problem.X.transpose() * problem.X / n;
  c = problem.X.transpose() * problem.y / n;
}

Eigen::VectorXd Gram::gradient(const Eigen::VectorXd& w) const { return G * w - c; }

}  // namespace dropreg
