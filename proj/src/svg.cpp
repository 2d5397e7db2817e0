#include "road/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace road::svg {

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 70, kRight = 600, kTop = 46, kBottom = 420;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct LogAxis {
  double lo = 0, hi = 1;  // in log10 units

  void expand(double value) {
    const double l = std::log10(value);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
};

}  // namespace

std::string loglog_plot(const std::vector<Series>& series, const std::string& x_label,
                        const std::string& y_label, const std::string& title) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) {
        x_lo = std::min(x_lo, std::log10(s.x[i]));
        x_hi = std::max(x_hi, std::log10(s.x[i]));
        y_lo = std::min(y_lo, std::log10(s.y[i]));
        y_hi = std::max(y_hi, std::log10(s.y[i]));
      }
  if (!(x_lo <= x_hi)) {
    x_lo = y_lo = -1;
    x_hi = y_hi = 1;
  }
  if (x_hi - x_lo < 1e-9) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-9) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  x_lo = std::floor(x_lo);
  x_hi = std::ceil(x_hi);
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);

  const auto px = [&](double v) {
    return kLeft + (std::log10(v) - x_lo) / (x_hi - x_lo) * (kRight - kLeft);
  };
  const auto py = [&](double v) {
    return kBottom - (std::log10(v) - y_lo) / (y_hi - y_lo) * (kBottom - kTop);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + escape(title) + "</text>\n";

  for (int k = int(x_lo); k <= int(x_hi); ++k) {
    const double x = kLeft + (k - x_lo) / (x_hi - x_lo) * (kRight - kLeft);
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(kBottom) + "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(kBottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e" +
           std::to_string(k) + "</text>\n";
  }
  for (int k = int(y_lo); k <= int(y_hi); ++k) {
    const double y = kBottom - (k - y_lo) / (y_hi - y_lo) * (kBottom - kTop);
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kRight) +
           "\" y2=\"" + num(y) + "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" +
           std::to_string(k) + "</text>\n";
  }
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
         num(kRight - kLeft) + "\" height=\"" + num(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"" + num(kBottom + 40) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         escape(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + num((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 " + num((kTop + kBottom) / 2) + ")\">" +
         escape(y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (std::size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i) {
      if (!(series[s].x[i] > 0) || !(series[s].y[i] > 0)) continue;
      points += num(px(series[s].x[i])) + "," + num(py(series[s].y[i])) + " ";
    }
    if (!points.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
      for (std::size_t i = 0; i < std::min(series[s].x.size(), series[s].y.size()); ++i) {
        if (!(series[s].x[i] > 0) || !(series[s].y[i] > 0)) continue;
        out += "<circle cx=\"" + num(px(series[s].x[i])) + "\" cy=\"" +
               num(py(series[s].y[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    }
    const double ly = kTop + 16 + 18 * double(s);
    out += "<line x1=\"" + num(kRight + 12) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(kRight + 34) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kRight + 40) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace road::svg
