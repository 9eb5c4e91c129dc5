#include "crisis/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace crisis::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  if (std::abs(v - std::round(v)) < 1e-9 && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.3g", v);
  }
  return buf;
}

// Roughly five ticks at 1/2/5 multiples of a power of ten.
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) out.push_back(t);
  return out;
}

}  // namespace

std::string render(const LineChart& chart) {
  constexpr double kLeft = 70;
  constexpr double kRight = 150;
  constexpr double kTop = 40;
  constexpr double kBottom = 50;
  const double plot_w = chart.width - kLeft - kRight;
  const double plot_h = chart.height - kTop - kBottom;

  double x_lo = 0;
  double x_hi = 1;
  double y_lo = 0;
  double y_hi = 1;
  bool any_x = false;
  bool any_y = false;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_lo = any_x ? std::min(x_lo, s.x[i]) : s.x[i];
      x_hi = any_x ? std::max(x_hi, s.x[i]) : s.x[i];
      any_x = true;
      if (i < s.y.size() && s.y[i]) {
        y_lo = any_y ? std::min(y_lo, *s.y[i]) : *s.y[i];
        y_hi = any_y ? std::max(y_hi, *s.y[i]) : *s.y[i];
        any_y = true;
      }
    }
  }
  if (chart.y_min) y_lo = *chart.y_min;
  if (chart.y_max) y_hi = *chart.y_max;
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) y_hi = y_lo + 1;

  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) {
    const double f = (y - y_lo) / (y_hi - y_lo);
    return chart.invert_y ? kTop + f * plot_h : kTop + (1 - f) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(chart.width) << "\" height=\""
      << num(chart.height) << "\" viewBox=\"0 0 " << num(chart.width) << ' ' << num(chart.height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(chart.width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(chart.title) << "</text>\n";

  std::vector<double> yt;
  if (chart.integer_ticks) {
    for (double t = std::ceil(y_lo); t <= y_hi + 1e-9; t += 1) yt.push_back(t);
  } else {
    yt = nice_ticks(y_lo, y_hi);
  }
  for (double t : yt) {
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\""
        << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
        << "</text>\n";
  }
  for (double t : nice_ticks(x_lo, x_hi)) {
    out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(px(t)) << "\" y2=\""
        << num(kTop + plot_h + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(chart.height - 10)
      << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(kTop + plot_h / 2) << ")\">" << escape(chart.y_label) << "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i >= s.y.size() || !s.y[i]) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L" : (path.empty() ? "M" : " M")) + num(px(s.x[i])) + ',' + num(py(*s.y[i]));
      pen_down = true;
    }
    if (!path.empty())
      out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(k);
    out << "<line x1=\"" << num(kLeft + plot_w + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + plot_w + 32)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(kLeft + plot_w + 38) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace crisis::svg
