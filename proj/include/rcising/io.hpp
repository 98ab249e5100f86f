#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include <rcising/error.hpp>
#include <rcising/experiments/two_point.hpp>
#include <rcising/lattice.hpp>

namespace rcising::io {

// Fixed 17-significant-digit rendering used by every output file.
inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

// Whitespace-separated tokens.
inline std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline double parse_double(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("field '" + field + "': expected a number, got '" + text + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("field '" + field + "': expected an integer, got '" + text + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("field '" + field + "': expected a non-negative integer, got '" + text + "'");
  return v;
}

// "a;b;c" -> coordinates.
inline Coord parse_coord(const std::string& text, const std::string& field) {
  Coord c;
  for (const std::string& part : split(text, ';')) c.push_back(static_cast<int>(parse_int(part, field)));
  return c;
}

inline std::string coord_text(const Coord& x) { return experiments::TwoPointTable::describe(x); }

// Plain key = value configuration. Lines starting with '#' are comments.
// A run manifest is also accepted: its "config" object is read instead.
class Config {
 public:
  static Config parse(const std::string& text) {
    Config c;
    if (const std::string t = trim(text); !t.empty() && t.front() == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(t);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
      }
      if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("manifest has no 'config' object");
      for (const auto& [k, v] : j["config"].items()) c.set(k, v.is_string() ? v.get<std::string>() : v.dump());
      return c;
    }
    std::istringstream in(text);
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw ConfigError("config line " + std::to_string(no) + ": empty key");
      c.set(key, trim(t.substr(eq + 1)));
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void erase(const std::string& key) { values_.erase(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required field '" + key + "'");
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }
  double get_double(const std::string& key) const { return parse_double(get(key), key); }
  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }
  std::int64_t get_int(const std::string& key) const { return parse_int(get(key), key); }
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }
  std::uint64_t get_u64(const std::string& key) const { return parse_u64(get(key), key); }
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
  }
  bool get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("field '" + key + "': expected true or false, got '" + v + "'");
  }
  // Comma- or whitespace-separated numbers.
  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& t : list(key)) out.push_back(parse_double(t, key));
    return out;
  }
  std::vector<int> get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& t : list(key)) out.push_back(static_cast<int>(parse_int(t, key)));
    return out;
  }
  std::vector<std::string> list(const std::string& key) const {
    std::string v = get(key);
    for (char& ch : v)
      if (ch == ',') ch = ' ';
    return tokens(v);
  }

  // Rejects keys outside `known`, naming the first offender.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_)
      if (!known.count(k)) throw ConfigError("unknown config field '" + k + "'");
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

// Comma-separated rows with a header, LF line endings.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  Csv& row(const std::vector<std::string>& cells) {
    require(cells.size() == width_, "csv row width does not match the header");
    line(cells);
    return *this;
  }
  const std::string& str() const { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      require(cells[i].find_first_of(",\n\"") == std::string::npos, "csv cell contains a separator: " + cells[i]);
      text_ += (i ? "," : "") + cells[i];
    }
    text_ += '\n';
  }
  std::size_t width_;
  std::string text_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two-point table as CSV: x,value,se with x written as "a;b;c".
inline std::string table_csv(const experiments::TwoPointTable& t) {
  Csv csv({"x", "value", "se"});
  for (const auto& [x, e] : t.sorted()) csv.row({coord_text(x), fmt_double(e.value), fmt_double(e.se)});
  return csv.str();
}

inline experiments::TwoPointTable parse_table_csv(const std::string& text, int period = 0) {
  experiments::TwoPointTable t;
  t.period = period;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  for (int no = 1; std::getline(in, line); ++no) {
    const std::string l = trim(line);
    if (l.empty()) continue;
    const auto cells = split(l, ',');
    if (header) {
      if (cells.size() < 2 || cells[0] != "x" || cells[1] != "value")
        throw ConfigError("two-point table must start with the header x,value,se");
      header = false;
      continue;
    }
    if (cells.size() < 2) throw ConfigError("two-point table line " + std::to_string(no) + ": too few columns");
    const Coord x = parse_coord(cells[0], "table x");
    if (t.dim == 0) t.dim = static_cast<int>(x.size());
    if (static_cast<int>(x.size()) != t.dim)
      throw ConfigError("two-point table line " + std::to_string(no) + ": inconsistent dimension");
    const double se = cells.size() > 2 ? parse_double(cells[2], "table se") : 0.0;
    t.set(x, parse_double(cells[1], "table value"), se);
  }
  if (t.dim == 0) throw ConfigError("two-point table is empty");
  return t;
}

}  // namespace rcising::io
