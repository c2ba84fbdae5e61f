#pragma once

// Series ingestion and tabular output (CSV or JSON).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfinv/cascade.hpp"
#include "mfinv/error.hpp"

namespace mfinv {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

struct SeriesFile {
  std::vector<double> values;
  bool had_header = false;
  bool had_timestamps = false;
};

/// One value per line, optionally preceded by a timestamp column
/// (`timestamp,value`).  A non-numeric first line is taken as a header; blank
/// lines and lines starting with '#' are skipped.  Timestamps must be strictly
/// increasing (numerically when both parse as numbers, lexicographically
/// otherwise) and are discarded afterwards.
inline SeriesFile parse_series_csv(std::istream& in, const std::string& source = "<input>") {
  SeriesFile out;
  std::string line;
  std::size_t lineno = 0;
  bool first_data_line = true;
  std::optional<std::string> prev_stamp;
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << source << ":" << lineno << ": " << what;
    throw ValidationError(os.str());
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, ',');
    if (fields.size() > 2) fail("expected 1 or 2 columns, found " + std::to_string(fields.size()));
    const auto value = detail::parse_double(fields.back());
    if (!value) {
      if (first_data_line) {
        out.had_header = true;
        first_data_line = false;
        continue;
      }
      fail("value is not a number");
    }
    first_data_line = false;
    if (fields.size() == 2) {
      out.had_timestamps = true;
      const std::string stamp(detail::trim(fields.front()));
      if (prev_stamp) {
        const auto a = detail::parse_double(*prev_stamp), b = detail::parse_double(stamp);
        const bool increasing = (a && b) ? *b > *a : stamp > *prev_stamp;
        if (!increasing) fail("timestamps are not strictly increasing");
      }
      prev_stamp = stamp;
    }
    out.values.push_back(*value);
  }
  if (out.values.empty()) {
    std::ostringstream os;
    os << source << ": no data rows";
    throw ValidationError(os.str());
  }
  return out;
}

inline SeriesFile read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path);
  return parse_series_csv(in, path);
}

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { csv, json };

inline void write_csv(std::ostream& os, const Table& t, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) os << format_double(v);
            else if constexpr (std::is_same_v<V, long long>) os << v;
            else if constexpr (std::is_same_v<V, std::string>) os << v;
          },
          row[i]);
    }
    os << '\n';
  }
}

inline nlohmann::json cell_to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<V, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else return v;
      },
      c);
}

inline nlohmann::json table_to_json(const Table& t, const nlohmann::json& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) r[t.columns[i]] = cell_to_json(row[i]);
    rows.push_back(std::move(r));
  }
  return {{"meta", meta}, {"columns", t.columns}, {"rows", rows}};
}

inline nlohmann::json to_json(const CascadeSpec& s) {
  return {{"weights", s.weights}, {"ratios", s.ratios}};
}

inline CascadeSpec cascade_spec_from_json(const nlohmann::json& j) {
  try {
    CascadeSpec s;
    s.weights = j.at("weights").get<std::vector<double>>();
    s.ratios = j.at("ratios").get<std::vector<double>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("cascade spec JSON: ") + e.what());
  }
}

/// 64-bit FNV-1a, used to stamp outputs with a short configuration digest.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace mfinv
