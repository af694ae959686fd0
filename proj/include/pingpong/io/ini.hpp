#pragma once

// TOML-style key/value files read through boost::property_tree's INI parser.
// Values may be quoted, lists may be written as [a, b] or a, b, and a
// trailing "# comment" is ignored.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pingpong/errors.hpp"

namespace pingpong::io {

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops a trailing comment that starts outside quotes.
inline std::string strip_comment(const std::string& s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#' || c == ';') {
      return s.substr(0, i);
    }
  }
  return s;
}

}  // namespace detail

class IniFile {
 public:
  IniFile() = default;

  static IniFile load(const std::filesystem::path& path) {
    IniFile f;
    f.path_ = path;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), f.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("cannot read config '" + path.string() + "': " + e.message() +
                        (e.line() ? " (line " + std::to_string(e.line()) + ")" : std::string()));
    }
    // The parser drops sections without keys; record every header so that
    // check_sections still sees them.
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
      line = detail::trim(detail::strip_comment(line));
      if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
        f.headers_.insert(detail::trim(line.substr(1, line.size() - 2)));
      }
    }
    return f;
  }

  const std::filesystem::path& path() const { return path_; }

  /// Directory relative paths inside the file are resolved against.
  std::filesystem::path base_dir() const { return path_.parent_path(); }

  bool has_section(const std::string& section) const { return section_ptr(section) != nullptr; }

  bool has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto* sec = section_ptr(section);
    if (!sec) return std::nullopt;
    auto it = sec->find(key);
    if (it == sec->not_found()) return std::nullopt;
    auto v = detail::unquote(detail::strip_comment(it->second.data()));
    if (v.empty()) return std::nullopt;
    return v;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const {
    if (auto v = raw(section, key)) return *v;
    if (fallback) return *fallback;
    throw ConfigError(where() + ": missing [" + section + "] " + key);
  }

  std::optional<double> get_double(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    if (!v) return std::nullopt;
    double out = 0.0;
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || p != end) {
      throw ConfigError(where() + ": [" + section + "] " + key + " = '" + *v + "' is not a number");
    }
    return out;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    return get_double(section, key).value_or(fallback);
  }

  double require_double(const std::string& section, const std::string& key) const {
    if (auto v = get_double(section, key)) return *v;
    throw ConfigError(where() + ": missing [" + section + "] " + key);
  }

  std::optional<int> get_int(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    if (!v) return std::nullopt;
    int out = 0;
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, out);
    if (ec != std::errc() || p != end) {
      throw ConfigError(where() + ": [" + section + "] " + key + " = '" + *v + "' is not an integer");
    }
    return out;
  }

  int get_int(const std::string& section, const std::string& key, int fallback) const {
    return get_int(section, key).value_or(fallback);
  }

  std::optional<bool> get_bool(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "yes" || *v == "on" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "off" || *v == "0") return false;
    throw ConfigError(where() + ": [" + section + "] " + key + " = '" + *v + "' is not a boolean");
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    return get_bool(section, key).value_or(fallback);
  }

  /// Comma-separated list, optionally in brackets, each item unquoted.
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    std::vector<std::string> out;
    if (!v) return out;
    std::string s = *v;
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      auto item = detail::unquote(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!item.empty()) out.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  /// Resolves a path value against the file's directory.
  std::optional<std::filesystem::path> get_path(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::filesystem::path p(*v);
    if (p.is_relative()) p = base_dir() / p;
    return p;
  }

  /// Rejects sections and keys outside the allowed sets so that typos fail loudly.
  void check_keys(const std::string& section, const std::set<std::string>& allowed) const {
    const auto* sec = section_ptr(section);
    if (!sec) return;
    for (const auto& [k, _] : *sec) {
      if (!allowed.contains(k)) throw ConfigError(where() + ": unknown key [" + section + "] " + k);
    }
  }

  void check_sections(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : tree_) {
      if (v.empty() && !v.data().empty()) throw ConfigError(where() + ": key '" + k + "' outside any section");
      if (!allowed.contains(k)) throw ConfigError(where() + ": unknown section [" + k + "]");
    }
    for (const auto& h : headers_) {
      if (!allowed.contains(h)) throw ConfigError(where() + ": unknown section [" + h + "]");
    }
  }

 private:
  const boost::property_tree::ptree* section_ptr(const std::string& section) const {
    auto it = tree_.find(section);
    return it == tree_.not_found() ? nullptr : &it->second;
  }

  std::string where() const { return path_.empty() ? std::string("config") : path_.string(); }

  std::filesystem::path path_;
  std::set<std::string> headers_;
  boost::property_tree::ptree tree_;
};

}  // namespace pingpong::io
