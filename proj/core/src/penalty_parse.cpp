#include <charconv>
#include <cmath>
#include <string>

#include "dropreg/error.hpp"
#include "dropreg/penalty.hpp"
#include "dropreg/spec_string.hpp"

namespace dropreg {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

SpecString parse_spec_string(std::string_view text) {
  text = trim(text);
  SpecString out;
  const auto colon = text.find(':');
  out.name = std::string(trim(text.substr(0, colon)));
  if (out.name.empty()) throw Error(ErrorCode::ParseError, "empty spec name in '" + std::string(text) + "'");
  if (colon == std::string_view::npos) return out;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
      throw Error(ErrorCode::ParseError, "expected key=value, got '" + std::string(item) + "'");
    }
    std::string key(trim(item.substr(0, eq)));
    for (const auto& [k, v] : out.args) {
      if (k == key) throw Error(ErrorCode::ParseError, "duplicate key '" + key + "'");
    }
    out.args.emplace_back(std::move(key), std::string(trim(item.substr(eq + 1))));
  }
  return out;
}

SpecArgs::SpecArgs(SpecString spec) : spec_(std::move(spec)), used_(spec_.args.size(), false) {}

bool SpecArgs::has(std::string_view key) const {
  for (const auto& [k, v] : spec_.args) {
    if (k == key) return true;
  }
  return false;
}

const std::string* SpecArgs::find(std::string_view key) {
  for (std::size_t i = 0; i < spec_.args.size(); ++i) {
    if (spec_.args[i].first == key) {
      used_[i] = true;
      return &spec_.args[i].second;
    }
  }
  return nullptr;
}

double SpecArgs::real(std::string_view key) {
  const std::string* value = find(key);
  if (value == nullptr) {
    throw Error(ErrorCode::ParseError,
                "'" + spec_.name + "' requires parameter '" + std::string(key) + "'");
  }
  double out = 0.0;
  const auto* end = value->data() + value->size();
  const auto [ptr, ec] = std::from_chars(value->data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw Error(ErrorCode::ParseError,
                "parameter '" + std::string(key) + "' is not a finite number: '" + *value + "'");
  }
  return out;
}

double SpecArgs::real_or(std::string_view key, double fallback) {
  return has(key) ? real(key) : fallback;
}

std::size_t SpecArgs::count(std::string_view key) {
  const double v = real(key);
  if (v < 0.0 || v != std::floor(v)) {
    throw Error(ErrorCode::ParseError,
                "parameter '" + std::string(key) + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::optional<std::size_t> SpecArgs::count_opt(std::string_view key) {
  if (!has(key)) return std::nullopt;
  return count(key);
}

void SpecArgs::finish() const {
  for (std::size_t i = 0; i < used_.size(); ++i) {
    if (!used_[i]) {
      throw Error(ErrorCode::ParseError, "unknown parameter '" + spec_.args[i].first +
                                             "' for '" + spec_.name + "'");
    }
  }
}

std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

PenaltySpec parse_penalty(std::string_view text) {
  SpecArgs args(parse_spec_string(text));
  const std::string& name = args.name();
  auto make = [&]() -> PenaltySpec {
    if (name == "l1") return PenaltySpec::l1();
    if (name == "lp") return PenaltySpec::lp(args.real("p"));
    if (name == "lppow") return PenaltySpec::lp_pow(args.real("p"));
    if (name == "l0") return PenaltySpec::l0();
    if (name == "elasticnet") return PenaltySpec::elastic_net(args.real("theta"));
    if (name == "huber") return PenaltySpec::huber(args.real("eps"));
    if (name == "logsum") return PenaltySpec::log_sum(args.real("eps"));
    if (name == "scad") {
      const double a = args.real("a");
      return PenaltySpec::scad(a, args.real("lambda"));
    }
    if (name == "mcp") {
      const double a = args.real("a");
      return PenaltySpec::mcp(a, args.real("lambda"));
    }
    if (name == "hardthresh") return PenaltySpec::hard_thresh(args.count("k"));
    throw Error(ErrorCode::ParseError, "unknown penalty '" + name + "'");
  };
  try {
    PenaltySpec spec = make();
    args.finish();
    return spec;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidParameter) throw Error(ErrorCode::ParseError, e.what());
    throw;
  }
}

}  // namespace dropreg
