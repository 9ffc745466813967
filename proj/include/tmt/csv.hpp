#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tmt/error.hpp"

namespace tmt::csv {

// Shortest decimal representation that round-trips through strtod. Output is
// locale independent so that repeated runs produce identical bytes.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Row-at-a-time RFC-4180 writer.
class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  Writer& field(std::string_view s) {
    sep();
    os_ << quote(s);
    return *this;
  }
  Writer& field(double v) {
    sep();
    os_ << format_double(v);
    return *this;
  }
  Writer& field(std::int64_t v) {
    sep();
    os_ << v;
    return *this;
  }
  Writer& field(std::uint64_t v) {
    sep();
    os_ << v;
    return *this;
  }
  Writer& field(int v) { return field(static_cast<std::int64_t>(v)); }

  void end_row() {
    os_ << "\n";
    first_ = true;
  }

  void header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(std::string_view(n));
    end_row();
  }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }

  std::ostream& os_;
  bool first_ = true;
};

/// Splits one CSV record. Handles quoted fields; a quoted field may not span
/// lines (none of our formats need that).
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view s, std::string_view what) {
  std::string t = trim(s);
  double v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ParseError("invalid number for " + std::string(what) + ": '" + t + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::string t = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ParseError("invalid integer for " + std::string(what) + ": '" + t + "'");
  return v;
}

}  // namespace tmt::csv
