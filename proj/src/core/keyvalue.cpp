#include "drd/core/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <sstream>

#include "drd/core/error.hpp"

namespace drd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& key, const std::string& source) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) {
    throw ConfigError(source + ": key '" + key + "' has invalid value '" + text + "'");
  }
  return v;
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& source) {
  KeyValues kv;
  kv.source_ = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (kv.has(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    kv.entries_.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

void KeyValues::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = std::move(value);
      return;
    }
  entries_.emplace_back(key, std::move(value));
}

bool KeyValues::has(const std::string& key) const { return find(key) != nullptr; }

const std::string* KeyValues::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::string KeyValues::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void KeyValues::require_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : entries_)
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(source_ + ": unknown key '" + k + "'");
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_number<double>(*v, key, source_) : fallback;
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
  const std::string* v = find(key);
  return v ? parse_number<std::int64_t>(*v, key, source_) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  const std::string* v = find(key);
  return v ? parse_number<std::uint64_t>(*v, key, source_) : fallback;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ConfigError(source_ + ": key '" + key + "' expects true or false, got '" + *v + "'");
}

std::vector<int> KeyValues::get_int_list(const std::string& key, std::vector<int> fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number<int>(trim(item), key, source_));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace drd
