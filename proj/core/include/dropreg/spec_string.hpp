#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dropreg {

/// "name:key=value,key=value" split into its parts. Keys are unique.
struct SpecString {
  std::string name;
  std::vector<std::pair<std::string, std::string>> args;
};

SpecString parse_spec_string(std::string_view text);

/// Typed, consuming access to a SpecString's arguments. finish() rejects
/// any key that was never read.
class SpecArgs {
 public:
  explicit SpecArgs(SpecString spec);

  const std::string& name() const { return spec_.name; }
  bool has(std::string_view key) const;
  double real(std::string_view key);
  double real_or(std::string_view key, double fallback);
  std::size_t count(std::string_view key);
  std::optional<std::size_t> count_opt(std::string_view key);
  void finish() const;

 private:
  const std::string* find(std::string_view key);

  SpecString spec_;
  std::vector<bool> used_;
};

/// Shortest decimal that round-trips to the same double.
std::string format_real(double value);

}  // namespace dropreg
