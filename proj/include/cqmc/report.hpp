#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqmc {

struct ConvergencePoint {
  std::uint64_t n = 0;
  double mean_abs_error = 0.0;
  double rmse = 0.0;
  double std_error = 0.0;  // standard error of mean_abs_error
  double mean_estimate = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double slope_std_error = 0.0;
  double intercept = 0.0;
  std::size_t points_used = 0;
};

struct ConvergenceReport {
  std::string label;
  std::vector<ConvergencePoint> points;
  SlopeFit fit;
  std::size_t fit_skip = 2;  // smallest n values excluded from the fit
  double reference = 0.0;
  std::string reference_provenance;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Least squares of log2(mean_abs_error) on log2(n), skipping the first `skip`
/// points when at least three remain. Zero errors are dropped (log undefined).
inline SlopeFit fit_slope(std::span<const ConvergencePoint> pts, std::size_t skip = 2) {
  if (pts.size() < skip + 3) skip = 0;
  std::vector<double> xs, ys;
  for (std::size_t k = skip; k < pts.size(); ++k) {
    if (!(pts[k].mean_abs_error > 0.0)) continue;
    xs.push_back(std::log2(static_cast<double>(pts[k].n)));
    ys.push_back(std::log2(pts[k].mean_abs_error));
  }
  SlopeFit fit;
  fit.points_used = xs.size();
  if (xs.size() < 2) return fit;
  const double nx = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= nx;
  my /= nx;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (xs.size() > 2) {
    double rss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double r = ys[k] - fit.intercept - fit.slope * xs[k];
      rss += r * r;
    }
    fit.slope_std_error = std::sqrt(rss / (nx - 2.0) / sxx);
  }
  return fit;
}

inline std::string format_csv(const ConvergenceReport& report) {
  std::string out = "n,mean_abs_error,rmse,stderr\n";
  char buf[160];
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof buf, "%llu,%.12e,%.12e,%.12e\n",
                  static_cast<unsigned long long>(p.n), p.mean_abs_error, p.rmse, p.std_error);
    out += buf;
  }
  return out;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string xml_escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '&': r += "&amp;"; break;
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

}  // namespace detail

inline void emit_csv(const ConvergenceReport& report, const std::string& path) {
  detail::write_file(path, format_csv(report));
}

/// Log-log chart of mean absolute error against n. Each series gets dashed
/// n^(-1/2) and n^(-1) guides anchored at its first point.
inline std::string format_svg(std::span<const ConvergenceReport> reports) {
  constexpr double width = 720, height = 480, left = 80, right = 180, top = 30, bottom = 60;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : reports)
    for (const auto& p : r.points) {
      if (!(p.mean_abs_error > 0.0)) continue;
      xmin = std::min(xmin, std::log2(static_cast<double>(p.n)));
      xmax = std::max(xmax, std::log2(static_cast<double>(p.n)));
      ymin = std::min(ymin, std::log10(p.mean_abs_error));
      ymax = std::max(ymax, std::log10(p.mean_abs_error));
    }
  if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = -1; ymax = 0; }
  if (xmax - xmin < 1.0) xmax = xmin + 1.0;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax - ymin < 1.0) ymax = ymin + 1.0;

  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };
  auto clampy = [&](double ly) { return std::clamp(ly, ymin, ymax); };

  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
    << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e) {
    s << "<line x1=\"" << px(e) << "\" y1=\"" << top + ph << "\" x2=\"" << px(e) << "\" y2=\""
      << top + ph + 5 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << px(e) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\">2^" << e
      << "</text>\n";
  }
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e) {
    s << "<line x1=\"" << left - 5 << "\" y1=\"" << py(e) << "\" x2=\"" << left << "\" y2=\"" << py(e)
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">1e" << e
      << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15
    << "\" text-anchor=\"middle\">n</text>\n";
  s << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << top + ph / 2 << ")\">mean absolute error</text>\n";

  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    const char* color = colors[k % 6];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : r.points)
      if (p.mean_abs_error > 0.0)
        pts.emplace_back(std::log2(static_cast<double>(p.n)), std::log10(p.mean_abs_error));
    if (!pts.empty()) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [lx, ly] : pts) s << px(lx) << "," << py(ly) << " ";
      s << "\"/>\n";
      for (const auto& [lx, ly] : pts)
        s << "<circle cx=\"" << px(lx) << "\" cy=\"" << py(ly) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      const auto [x0, y0] = pts.front();
      for (double rate : {0.5, 1.0}) {
        // Stop the guide where it leaves the plot through the bottom edge.
        const double drop = rate * std::log10(2.0);
        const double x1 = std::min(xmax, x0 + (y0 - ymin) / drop);
        const double y1 = y0 - drop * (x1 - x0);
        s << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(x1)
          << "\" y2=\"" << py(clampy(y1)) << "\" stroke=\"" << color
          << "\" stroke-dasharray=\"" << (rate == 0.5 ? "6,4" : "2,3") << "\" stroke-width=\"1\"/>\n";
      }
    }
    const double ly = top + 20.0 + 18.0 * static_cast<double>(k);
    s << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 30
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << width - right + 35 << "\" y=\"" << ly + 4 << "\">"
      << detail::xml_escape(r.label.empty() ? "series" : r.label) << "</text>\n";
  }
  const double ly = top + 20.0 + 18.0 * static_cast<double>(reports.size()) + 10.0;
  s << "<text x=\"" << width - right + 10 << "\" y=\"" << ly << "\">dashed: n^-1/2</text>\n";
  s << "<text x=\"" << width - right + 10 << "\" y=\"" << ly + 16 << "\">dotted: n^-1</text>\n";
  s << "</g>\n</svg>\n";
  return s.str();
}

inline void emit_svg(std::span<const ConvergenceReport> reports, const std::string& path) {
  detail::write_file(path, format_svg(reports));
}

inline void emit_svg(const ConvergenceReport& report, const std::string& path) {
  emit_svg(std::span<const ConvergenceReport>(&report, 1), path);
}

}  // namespace cqmc
