#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chowla/util.hpp"

namespace chowla {

// Flat key-value experiment configuration.  Lines are `key = value`; blank
// lines and lines starting with # are skipped.  Only known keys are
// accepted so typos fail loudly before any computation starts.
struct ExperimentConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  u64 get_u64(const std::string& key, u64 fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    u64 out = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw std::invalid_argument("config key " + key +
                                  " needs an unsigned integer, got '" + s +
                                  "'");
    return out;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key " + key +
                                  " needs a real number, got '" + it->second +
                                  "'");
    }
  }

  std::vector<u64> get_u64_list(const std::string& key,
                                std::vector<u64> fallback) const;
  std::vector<i64> get_i64_list(const std::string& key,
                                std::vector<i64> fallback) const;
};

// Comma-separated integer lists, shared between config values and CLI flags.
template <class Int>
std::vector<Int> parse_int_list(const std::string& text,
                                const std::string& what) {
  std::vector<Int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Int v = 0;
    const char* begin = item.data();
    const char* end = item.data() + item.size();
    while (begin < end && *begin == ' ') ++begin;
    while (end > begin && *(end - 1) == ' ') --end;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end || begin == end)
      throw std::invalid_argument(what + " needs comma-separated integers, "
                                  "got '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(what + " has an empty list");
  return out;
}

inline std::vector<u64> parse_u64_list(const std::string& text,
                                       const std::string& what) {
  return parse_int_list<u64>(text, what);
}

inline std::vector<i64> parse_i64_list(const std::string& text,
                                       const std::string& what) {
  return parse_int_list<i64>(text, what);
}

inline std::vector<u64> ExperimentConfig::get_u64_list(
    const std::string& key, std::vector<u64> fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return parse_u64_list(it->second, "config key " + key);
}

inline std::vector<i64> ExperimentConfig::get_i64_list(
    const std::string& key, std::vector<i64> fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return parse_i64_list(it->second, "config key " + key);
}

inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "sieve.limit",  "spec.k",        "spec.a_list",  "spec.b_list",
      "spec.x",       "spec.epsilon",  "ladder.w",     "ladder.h1",
      "ladder.h2",    "ladder.h3",     "ladder.h4",    "gowers.k",
      "gowers.n",     "gowers.w_list", "entropy.m_lo", "entropy.m_hi",
      "entropy.seed", "entropy.trials", "output.dir",  "output.format",
  };
  return keys;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto from = s.find_first_not_of(" \t\r");
    const auto to = s.find_last_not_of(" \t\r");
    return from == std::string::npos ? std::string()
                                     : s.substr(from, to - from + 1);
  };
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not 'key = value': " + stripped);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto& known = known_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown config key '" + key + "' on line " +
                                  std::to_string(line_no));
    if (cfg.values.count(key))
      throw std::invalid_argument("config key '" + key + "' appears twice");
    cfg.values[key] = value;
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace chowla
