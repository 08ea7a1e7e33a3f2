#pragma once

// Line-based configuration files:
//
//   # comment
//   [section]
//   key = value
//
// Times take ps/ns/us/ms/s suffixes (bare numbers are seconds) or a fibre
// length in km, converted at 5 us/km. Frequencies take Hz/kHz/MHz/GHz.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpi/error.hpp"
#include "tpi/model.hpp"

namespace tpi {

class ConfigError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits "12.5 kHz" into (12.5, "khz").
inline std::pair<double, std::string> split_quantity(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr == text.data())
    throw ConfigError("not a number: '" + std::string(text) + "'");
  const std::string_view rest = trim(std::string_view(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr)));
  return {value, lower(rest)};
}

}  // namespace detail

inline double parse_time(std::string_view text) {
  const auto [value, unit] = detail::split_quantity(text);
  if (unit.empty() || unit == "s") return value;
  if (unit == "ms") return value * 1e-3;
  if (unit == "us") return value * 1e-6;
  if (unit == "ns") return value * 1e-9;
  if (unit == "ps") return value * 1e-12;
  if (unit == "km") return value * kFibreDelayPerKm;
  throw ConfigError("unknown time unit '" + unit + "'");
}

inline double parse_frequency(std::string_view text) {
  const auto [value, unit] = detail::split_quantity(text);
  if (unit.empty() || unit == "hz") return value;
  if (unit == "khz") return value * 1e3;
  if (unit == "mhz") return value * 1e6;
  if (unit == "ghz") return value * 1e9;
  throw ConfigError("unknown frequency unit '" + unit + "'");
}

inline double parse_number(std::string_view text) {
  const auto [value, unit] = detail::split_quantity(text);
  if (!unit.empty()) throw ConfigError("unexpected unit '" + unit + "' on dimensionless value");
  return value;
}

// Comma-separated list.
inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = detail::trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class ConfigFile {
public:
  static ConfigFile parse(std::string_view text) {
    ConfigFile cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto body = detail::trim(line);
      if (body.empty() || body.front() == '#' || body.front() == ';') continue;
      if (body.front() == '[') {
        if (body.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
        section = detail::lower(detail::trim(body.substr(1, body.size() - 2)));
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const auto key = detail::lower(detail::trim(body.substr(0, eq)));
      auto value = detail::trim(body.substr(eq + 1));
      if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = detail::trim(value.substr(0, hash));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      if (!cfg.values_.emplace(std::make_pair(section, key), std::string(value)).second)
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + section + "." + key);
    }
    return cfg;
  }

  static ConfigFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.contains({section, key});
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    used_.insert({section, key});
    const auto it = values_.find({section, key});
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  double time(const std::string& section, const std::string& key, double fallback) const {
    return get(section, key, fallback, parse_time);
  }
  double frequency(const std::string& section, const std::string& key, double fallback) const {
    return get(section, key, fallback, parse_frequency);
  }
  double number(const std::string& section, const std::string& key, double fallback) const {
    return get(section, key, fallback, parse_number);
  }
  std::string text(const std::string& section, const std::string& key, std::string fallback) const {
    auto v = raw(section, key);
    return v ? *v : std::move(fallback);
  }

  std::uint64_t integer(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size())
      throw ConfigError(section + "." + key + ": not a non-negative integer");
    return out;
  }

  // Keys present in the file that no accessor has asked for.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.contains(k)) out.push_back(k.first + "." + k.second);
    return out;
  }

private:
  template <typename Parser>
  double get(const std::string& section, const std::string& key, double fallback, Parser parser) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      return parser(*v);
    } catch (const ConfigError& e) {
      throw ConfigError(section + "." + key + ": " + e.what());
    }
  }

  std::map<std::pair<std::string, std::string>, std::string> values_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace tpi
