#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dropreg/dropout.hpp"
#include "dropreg/duality.hpp"
#include "dropreg/penalty.hpp"
#include "dropreg/problem.hpp"
#include "dropreg/solvers.hpp"

namespace dropreg::harness {

inline constexpr std::string_view kVersion = "0.3.0";

/// Exit statuses shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kUsage = 1, kVerificationFailed = 2 };

/// Thrown for bad command-line input; maps to exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "lo:hi:step", inclusive of hi up to rounding.
std::vector<double> parse_grid(std::string_view text);

/// A penalty or dropout method as listed on the command line, with an
/// optional "scale=" multiplier. Methods without lambda get default_lambda.
struct CurveItem {
  std::string label;
  std::variant<PenaltySpec, MethodSpec> spec;
  double scale = 1.0;

  bool separable() const;
};

CurveItem parse_curve_item(std::string_view text, double default_lambda);

/// Header comment block: tool version, then each key=value in order.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;
void write_header(std::ostream& os, std::string_view command, const ConfigEcho& config);

/// "%.12g", with +inf written as "inf".
std::string format_number(double v);

/// Throws UsageError for an empty list or any non-separable item.
void require_separable(const std::vector<CurveItem>& items);

/// Columns |w| then Omega(|w|) per item. Rejects non-separable items.
void penalty_curve(std::ostream& os, const std::vector<CurveItem>& items,
                   const std::vector<double>& grid);

/// Rows k = 1..d for w_k = (1/sqrt k) 1{j <= k}. Separable methods are
/// summed coordinate-wise.
void sparse_curve(std::ostream& os, const std::vector<CurveItem>& items, int d);

/// One report row per penalty. Returns true when every check passed.
bool duality_report(std::ostream& os, const std::vector<PenaltySpec>& specs,
                    const std::vector<double>& w_grid, const DualCheckOptions& opts);

/// The penalties checked when none are named.
std::vector<PenaltySpec> default_duality_set();

struct Synthetic {
  Problem problem;
  Eigen::VectorXd w_true;
};

/// Standard normal X (then standardized), k unit-magnitude entries with
/// random signs at random positions, y = X w_true + noise_sigma * N(0, 1).
Synthetic gen_synthetic(int n, int d, int k, double noise_sigma, std::uint64_t seed);

/// "n=80,d=128,k=5[,noise=0]".
struct SyntheticSpec {
  int n = 100;
  int d = 20;
  int k = 5;
  double noise = 0.0;
};
SyntheticSpec parse_synthetic(std::string_view text);

/// Reads a numeric CSV (comma separated, '#' comment lines skipped).
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

/// Trace as CSV: iter, loss, objective, nonzeros, [seconds], w_0..w_{d-1}.
void write_trace(std::ostream& os, const Trace& trace, bool timing);
/// Summary as "# key=value" comment lines.
void write_metrics(std::ostream& os, const SolutionMetrics& m, bool has_truth);

struct DropoutVerifyResult {
  double closed_form = 0.0;
  MonteCarloEstimate mc;
  double z = 0.0;
};

/// Random standardized problem, random w and keep parameters alpha in
/// [alpha_lo, alpha_hi]; biased Bernoulli goes through biased_reparam.
DropoutVerifyResult dropout_verify(int n, int d, MaskKind family, std::size_t samples,
                                   std::uint64_t seed, double alpha_lo, double alpha_hi);

}  // namespace dropreg::harness
