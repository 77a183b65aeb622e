#pragma once

#include <Eigen/Core>

namespace dropreg {

/// Linear regression data with L(w) = (1/2n) ||y - X w||^2.
struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  /// Throws InvalidParameter on empty data or mismatched sizes.
  void validate() const;
  /// Throws NotStandardized unless |[X^T X / n]_jj - 1| <= tol.
  void require_standardized(double tol = 1e-8) const;
};

struct Standardized {
  Eigen::MatrixXd X;
  /// Root mean square of each raw column.
  Eigen::VectorXd scales;
};

/// Divides each column by its root mean square. Throws ZeroColumn.
Standardized standardize(const Eigen::MatrixXd& X_raw);

/// Weights for the raw design: X_raw * result == X * w_std.
Eigen::VectorXd unstandardize_weights(const Eigen::VectorXd& w_std, const Eigen::VectorXd& scales);

/// Cached G = X^T X / n and c = X^T y / n, so that grad L(w) = G w - c.
struct Gram {
  Eigen::MatrixXd G;
  Eigen::VectorXd c;

  explicit Gram(const Problem& problem);
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
};

}  // namespace dropreg
