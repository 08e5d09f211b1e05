#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spinpath/errors.hpp"

// CSV conventions: '\n' line endings, '.' decimal separator, 17 significant digits.
namespace spinpath::csv {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string num(long long v) { return std::to_string(v); }
inline std::string num(unsigned long long v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }
inline std::string num(unsigned long v) { return std::to_string(v); }
inline std::string num(long v) { return std::to_string(v); }

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ValidationError("not a number: '" + std::string(s) + "'");
  return v;
}

inline long long to_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ValidationError("not an integer: '" + std::string(s) + "'");
  return v;
}

/// Calls `fn(fields)` for every data row after checking the header line.
template <class Fn>
void for_each_row(std::istream& is, std::string_view header, Fn&& fn) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "CSV input is empty");
  require(trim(line) == header, "CSV header must be '" + std::string(header) + "'");
  const std::size_t width = split(header).size();
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(trim(line));
    require(fields.size() == width, "CSV row has wrong field count: '" + line + "'");
    fn(fields);
  }
}

/// Row-oriented CSV writer.
class Writer {
 public:
  Writer(std::ostream& os, std::initializer_list<std::string_view> columns) : os_(os), width_(columns.size()) {
    bool first = true;
    for (auto c : columns) {
      if (!first) os_ << ',';
      os_ << c;
      first = false;
    }
    os_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    static_assert(sizeof...(Ts) > 0);
    if (sizeof...(Ts) != width_) throw std::logic_error("csv row width mismatch");
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(values), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class T>
  static std::string cell(const T& v) { return num(v); }

  std::ostream& os_;
  std::size_t width_;
};

/// Opens `dir/name` for writing in binary mode so '\n' is never translated.
inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message(), "out-dir");
  std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open '" + (dir / name).string() + "' for writing", "out-dir");
  return os;
}

}  // namespace spinpath::csv
