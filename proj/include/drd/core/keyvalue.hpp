#pragma once

#include <string>
#include <utility>
#include <vector>

namespace drd {

/// Flat `key = value` text: one pair per line, `#` starts a comment, blank
/// lines ignored. Keys are unique. Order is preserved.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& source = "config");

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;
  const std::string* find(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;

  /// ConfigError naming the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;

  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;

 private:
  std::string source_ = "config";
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace drd
