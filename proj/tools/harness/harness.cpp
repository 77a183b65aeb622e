#include "harness/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "dropreg/error.hpp"
#include "dropreg/spec_string.hpp"

namespace dropreg::harness {
namespace {

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw UsageError(std::string(what) + ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_spec(const SpecString& spec) {
  std::string out = spec.name;
  for (std::size_t i = 0; i < spec.args.size(); ++i) {
    out += (i == 0 ? ":" : ",") + spec.args[i].first + "=" + spec.args[i].second;
  }
  return out;
}

// Omega(|w|) for one separable item, with effective penalties tabulated once.
class ScalarEvaluator {
 public:
  explicit ScalarEvaluator(const CurveItem& item) : item_(item) {
    if (const auto* m = std::get_if<MethodSpec>(&item.spec)) effective_.emplace(*m);
  }

  double operator()(double w) const {
    const double a = std::abs(w);
    if (effective_) return item_.scale * (*effective_)(a);
    return item_.scale * std::get<PenaltySpec>(item_.spec).omega_scalar(a);
  }

 private:
  const CurveItem& item_;
  std::optional<EffectivePenalty> effective_;
};

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
  const std::string s(text);
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : s.find(':', c1 + 1);
  if (c2 == std::string::npos) throw UsageError("grid must look like lo:hi:step, got '" + s + "'");
  const double lo = parse_double(std::string_view(s).substr(0, c1), "grid lo");
  const double hi = parse_double(std::string_view(s).substr(c1 + 1, c2 - c1 - 1), "grid hi");
  const double step = parse_double(std::string_view(s).substr(c2 + 1), "grid step");
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(hi) || !std::isfinite(lo)) {
    throw UsageError("grid needs lo <= hi and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw UsageError("grid has too many points");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

bool CurveItem::separable() const {
  return std::visit([](const auto& s) { return s.separable(); }, spec);
}

CurveItem parse_curve_item(std::string_view text, double default_lambda) {
  SpecString parts = parse_spec_string(text);
  double scale = 1.0;
  auto it = std::find_if(parts.args.begin(), parts.args.end(),
                         [](const auto& kv) { return kv.first == "scale"; });
  if (it != parts.args.end()) {
    scale = parse_double(it->second, "scale");
    parts.args.erase(it);
  }
  if (!is_method_name(parts.name)) {
    return CurveItem{std::string(text), parse_penalty(join_spec(parts)), scale};
  }
  const bool has_lambda = std::any_of(parts.args.begin(), parts.args.end(),
                                      [](const auto& kv) { return kv.first == "lambda"; });
  if (!has_lambda && parts.name != "magprune") {
    parts.args.insert(parts.args.begin(), {"lambda", format_real(default_lambda)});
  }
  return CurveItem{std::string(text), parse_method(join_spec(parts)), scale};
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_header(std::ostream& os, std::string_view command, const ConfigEcho& config) {
  os << "# dropreg " << kVersion << ' ' << command << '\n';
  for (const auto& [k, v] : config) os << "# " << k << '=' << v << '\n';
}

void require_separable(const std::vector<CurveItem>& items) {
  if (items.empty()) throw UsageError("penalty-curve needs at least one penalty or method");
  for (const CurveItem& item : items) {
    if (!item.separable()) {
      throw UsageError("'" + item.label + "' is not separable; use sparse-curve instead");
    }
  }
}

void penalty_curve(std::ostream& os, const std::vector<CurveItem>& items,
                   const std::vector<double>& grid) {
  require_separable(items);
  std::vector<std::optional<ScalarEvaluator>> evals(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < items.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          evals[i].emplace(items[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<double> table(grid.size() * items.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    const std::size_t chunks = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    const std::size_t per = (grid.size() + chunks - 1) / chunks;
    std::vector<std::jthread> workers;
    for (std::size_t lo = 0; lo < grid.size(); lo += per) {
      workers.emplace_back([&, lo] {
        try {
          for (std::size_t g = lo; g < std::min(grid.size(), lo + per); ++g) {
            for (std::size_t i = 0; i < items.size(); ++i) table[g * items.size() + i] = (*evals[i])(grid[g]);
          }
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }

  if (failure) std::rethrow_exception(failure);

  os << "w";
  for (const CurveItem& item : items) os << ',' << csv_field(item.label);
  os << '\n';
  for (std::size_t g = 0; g < grid.size(); ++g) {
    os << format_number(grid[g]);
    for (std::size_t i = 0; i < items.size(); ++i) os << ',' << format_number(table[g * items.size() + i]);
    os << '\n';
  }
}

void sparse_curve(std::ostream& os, const std::vector<CurveItem>& items, int d) {
  if (items.empty()) throw UsageError("sparse-curve needs at least one penalty or method");
  if (d < 1) throw UsageError("sparse-curve needs d >= 1");
  std::vector<std::optional<ScalarEvaluator>> evals(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto* m = std::get_if<MethodSpec>(&items[i].spec);
    if (m && m->separable()) evals[i].emplace(items[i]);
  }

  os << "k";
  for (const CurveItem& item : items) os << ',' << csv_field(item.label);
  os << '\n';
  for (int k = 1; k <= d; ++k) {
    const double mag = 1.0 / std::sqrt(static_cast<double>(k));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    w.head(k).setConstant(mag);
    os << k;
    for (std::size_t i = 0; i < items.size(); ++i) {
      double value = 0.0;
      if (const auto* p = std::get_if<PenaltySpec>(&items[i].spec)) {
        value = items[i].scale * omega(*p, w);
      } else if (evals[i]) {
        value = k * (*evals[i])(mag) + (d - k) * (*evals[i])(0.0);
      } else {
        const MethodSpec& m = std::get<MethodSpec>(items[i].spec);
        value = items[i].scale * omega(PenaltySpec::hard_thresh(m.k), w);
      }
      os << ',' << format_number(value);
    }
    os << '\n';
  }
}

std::vector<PenaltySpec> default_duality_set() {
  return {PenaltySpec::l1(),           PenaltySpec::lp(0.5),         PenaltySpec::lp_pow(0.5),
          PenaltySpec::l0(),           PenaltySpec::elastic_net(0.5), PenaltySpec::huber(1.0),
          PenaltySpec::log_sum(2.0),   PenaltySpec::scad(3.0, 1.0),   PenaltySpec::mcp(3.0, 1.0),
          PenaltySpec::hard_thresh(2)};
}

bool duality_report(std::ostream& os, const std::vector<PenaltySpec>& specs,
                    const std::vector<double>& w_grid, const DualCheckOptions& opts) {
  bool all = true;
  os << "penalty,max_omega_dev,max_argmin_rel_dev,points,argmin_points,status\n";
  for (const PenaltySpec& spec : specs) {
    const DualCheckReport r = check_dual_pair(spec, w_grid, opts);
    all = all && r.passed;
    os << csv_field(r.penalty) << ',' << format_number(r.max_omega_dev) << ','
       << format_number(r.max_argmin_rel_dev) << ',' << r.points << ',' << r.argmin_points << ','
       << (r.passed ? "pass" : "FAIL") << '\n';
  }
  return all;
}

Synthetic gen_synthetic(int n, int d, int k, double noise_sigma, std::uint64_t seed) {
  if (n < 1 || d < 1) throw UsageError("synthetic data needs n, d >= 1");
  if (k < 0 || k > d) throw UsageError("synthetic data needs 0 <= k <= d");
  if (!(noise_sigma >= 0.0)) throw UsageError("noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd raw(n, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) raw(i, j) = normal(rng);
  }
  Synthetic out;
  out.problem.X = standardize(raw).X;
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  out.w_true = Eigen::VectorXd::Zero(d);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < k; ++i) out.w_true[idx[static_cast<std::size_t>(i)]] = coin(rng) ? 1.0 : -1.0;
  Eigen::VectorXd noise(n);
  for (int i = 0; i < n; ++i) noise[i] = normal(rng);
  out.problem.y = out.problem.X * out.w_true + noise_sigma * noise;
  return out;
}

SyntheticSpec parse_synthetic(std::string_view text) {
  SpecArgs args(parse_spec_string("synthetic:" + std::string(text)));
  SyntheticSpec s;
  s.n = static_cast<int>(args.count_opt("n").value_or(static_cast<std::size_t>(s.n)));
  s.d = static_cast<int>(args.count_opt("d").value_or(static_cast<std::size_t>(s.d)));
  s.k = static_cast<int>(args.count_opt("k").value_or(static_cast<std::size_t>(s.k)));
  s.noise = args.real_or("noise", 0.0);
  args.finish();
  return s;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) throw UsageError("empty cell in '" + path + "'");
      row.push_back(parse_double(std::string_view(cell).substr(b, e - b + 1), path));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw UsageError("ragged rows in '" + path + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw UsageError("'" + path + "' has no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf;
    }
    os << '\n';
  }
}

void write_trace(std::ostream& os, const Trace& trace, bool timing) {
  const Eigen::Index d = trace.w_final.size();
  os << "iter,loss,objective,nonzeros";
  if (timing) os << ",seconds";
  for (Eigen::Index j = 0; j < d; ++j) os << ",w_" << j;
  os << '\n';
  for (const TraceRecord& r : trace.records) {
    os << r.iter << ',' << format_number(r.loss) << ',' << format_number(r.objective) << ','
       << r.nonzeros;
    if (timing) os << ',' << format_number(r.seconds);
    for (Eigen::Index j = 0; j < d; ++j) os << ',' << format_number(r.w[j]);
    os << '\n';
  }
}

void write_metrics(std::ostream& os, const SolutionMetrics& m, bool has_truth) {
  os << "# nonzeros=" << m.nonzeros << '\n';
  os << "# nonzero_fraction=" << format_number(m.nonzero_fraction) << '\n';
  if (!has_truth) return;
  os << "# precision=" << format_number(m.precision) << '\n';
  os << "# recall=" << format_number(m.recall) << '\n';
  os << "# nmse=" << format_number(m.nmse) << '\n';
  os << "# exact_support=" << (m.exact_support ? 1 : 0) << '\n';
}

DropoutVerifyResult dropout_verify(int n, int d, MaskKind family, std::size_t samples,
                                   std::uint64_t seed, double alpha_lo, double alpha_hi) {
  if (family == MaskKind::HardConcrete) throw UsageError("dropout-verify takes binary, gaussian or bernoulli");
  if (!(alpha_lo > 0.0 && alpha_lo <= alpha_hi && alpha_hi <= 1.0)) {
    throw UsageError("alpha range must satisfy 0 < lo <= hi <= 1");
  }
  const Synthetic data = gen_synthetic(n, d, std::min(d, 3), 0.5, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(alpha_lo, alpha_hi);
  Eigen::VectorXd w(d);
  Eigen::VectorXd alpha(d);
  for (int j = 0; j < d; ++j) {
    w[j] = normal(rng);
    alpha[j] = alpha_lo == alpha_hi ? alpha_lo : unif(rng);
  }
  std::vector<MaskModel> masks;
  for (int j = 0; j < d; ++j) masks.push_back(MaskModel::of_kind(family, alpha[j]));

  const Eigen::MatrixXd& X = data.problem.X;
  const Eigen::VectorXd& y = data.problem.y;
  DropoutVerifyResult r;
  if (family == MaskKind::BiasedBernoulli) {
    Eigen::VectorXd w_tilde(d);
    Eigen::VectorXd alpha_tilde(d);
    for (int j = 0; j < d; ++j) {
      const MaskMoments m = mask_moments(masks[static_cast<std::size_t>(j)]);
      if (m.variance == 0.0) {
        w_tilde[j] = m.mean * w[j];
        alpha_tilde[j] = 1.0;
        continue;
      }
      const BiasedReparam b = biased_reparam(masks[static_cast<std::size_t>(j)], 1.0);
      w_tilde[j] = b.mu * w[j];
      alpha_tilde[j] = b.alpha_tilde;
    }
    r.closed_form = expected_loss_closed_form(X, y, w_tilde, alpha_tilde);
  } else {
    r.closed_form = expected_loss_closed_form(X, y, w, alpha);
  }
  r.mc = expected_loss_monte_carlo(X, y, w, masks, samples, seed + 2);
  const double diff = r.mc.mean - r.closed_form;
  if (r.mc.std_error > 0.0) {
    r.z = diff / r.mc.std_error;
  } else {
    r.z = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(r.closed_form)) ? 0.0 : kInf;
  }
  return r;
}

}  // namespace dropreg::harness
