#pragma once

// Report files: CSV tables, flat name=value summaries and static log-log SVG plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bispec/error.hpp"
#include "bispec/fit.hpp"

namespace bispec {

/// Shortest round-trip-stable text for a double (17 significant digits).
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_number(long long x) { return std::to_string(x); }
inline std::string format_number(int x) { return std::to_string(x); }
inline std::string format_number(std::size_t x) { return std::to_string(x); }
inline std::string format_number(bool x) { return x ? "true" : "false"; }

/// Rows are flushed as written, so a failed run leaves every finished row on disk.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    columns_ = header.size();
    write(header);
  }

  template <class... Ts>
  void row(const Ts&... values) {
    std::vector<std::string> cells{format_cell(values)...};
    write(cells);
  }

  void write(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw DimensionMismatch("CSV row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    out_.flush();
  }

 private:
  static std::string format_cell(const std::string& s) { return s; }
  static std::string format_cell(const char* s) { return s; }
  template <class T>
  static std::string format_cell(const T& v) {
    return format_number(v);
  }

  std::ofstream out_;
  std::size_t columns_ = 0;
};

/// Ordered name=value lines.
class Summary {
 public:
  template <class T>
  void set(const std::string& name, const T& value) {
    std::string v;
    if constexpr (std::is_convertible_v<T, std::string>)
      v = value;
    else
      v = format_number(value);
    for (auto& [k, old] : entries_)
      if (k == name) {
        old = v;
        return;
      }
    entries_.emplace_back(name, v);
  }

  /// Records a threshold verdict as check.<name>=pass|fail.
  void check(const std::string& name, bool ok) {
    set("check." + name, std::string(ok ? "pass" : "fail"));
    if (!ok) all_pass_ = false;
  }
  bool all_pass() const { return all_pass_; }

  std::optional<std::string> get(const std::string& name) const {
    for (const auto& [k, v] : entries_)
      if (k == name) return v;
    return std::nullopt;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  bool all_pass_ = true;
};

/// Static log-log scatter with the fitted line and an optional reference slope
/// through the geometric mean of the data.
inline void write_loglog_svg(const std::filesystem::path& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<std::pair<double, double>>& pts, const PowerLawFit& fit,
                             std::optional<double> reference_slope) {
  require(!pts.empty(), "plot needs points");
  const double w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 60;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, std::log10(x));
    x1 = std::max(x1, std::log10(x));
    y0 = std::min(y0, std::log10(y));
    y1 = std::max(y1, std::log10(y));
  }
  const double padx = std::max(0.05, 0.08 * (x1 - x0)), pady = std::max(0.05, 0.15 * (y1 - y0));
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
  auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double ly) { return h - mb - (ly - y0) / (y1 - y0) * (h - mt - mb); };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return std::string(b);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d)
    s << "<text x=\"" << num(px(d)) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << h - 18 << "\" text-anchor=\"middle\">" << x_label << " (log)</text>\n";
  s << "<text x=\"16\" y=\"" << h / 2 << "\" transform=\"rotate(-90 16 " << h / 2 << ")\" text-anchor=\"middle\">"
    << y_label << " (log)</text>\n";

  auto line = [&](double slope, double icept, const char* color, const char* dash) {
    const double ya = slope * x0 + icept, yb = slope * x1 + icept;
    s << "<line x1=\"" << num(px(x0)) << "\" y1=\"" << num(py(ya)) << "\" x2=\"" << num(px(x1)) << "\" y2=\""
      << num(py(yb)) << "\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash << "\"/>\n";
  };
  // fit is in natural logs; convert the intercept to base 10
  line(fit.slope, fit.intercept / std::log(10.0), "steelblue", "none");
  if (reference_slope) {
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) mx += std::log10(x), my += std::log10(y);
    mx /= pts.size(), my /= pts.size();
    line(*reference_slope, my - *reference_slope * mx, "gray", "6,4");
  }
  for (const auto& [x, y] : pts)
    s << "<circle cx=\"" << num(px(std::log10(x))) << "\" cy=\"" << num(py(std::log10(y)))
      << "\" r=\"4\" fill=\"firebrick\"/>\n";
  s << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 18 << "\" fill=\"steelblue\">fitted slope " << num(fit.slope)
    << "</text>\n";
  if (reference_slope)
    s << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 34 << "\" fill=\"gray\">reference slope "
      << num(*reference_slope) << "</text>\n";
  s << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << s.str();
}

}  // namespace bispec
