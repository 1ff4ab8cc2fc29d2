#include "shubin/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace shubin::svg {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v, bool log_axis) {
  char buf[64];
  if (log_axis) {
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::vector<double> ticks(const Range& r, bool log_axis) {
  std::vector<double> out;
  if (log_axis) {
    const double first = std::ceil(r.lo);
    const double last = std::floor(r.hi);
    const double step = std::max(1.0, std::ceil((last - first) / 8.0));
    for (double v = first; v <= last + 1e-9; v += step) out.push_back(v);
    return out;
  }
  const double raw = (r.hi - r.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

}  // namespace

std::string render(const Plot& plot, int width, int height) {
  const double left = 70.0, right = 170.0, top = 40.0, bottom = 50.0;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0.0) &&
           (!plot.log_y || y > 0.0);
  };

  Range rx, ry;
  for (const auto& s : plot.series)
    for (const auto& [x, y] : s.points)
      if (usable(x, y)) {
        rx.add(tx(x));
        ry.add(ty(y));
      }
  rx.settle();
  ry.settle();

  auto px = [&](double v) { return left + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return top + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(plot.title) + "</text>\n";
  out += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) +
         "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double v : ticks(rx, plot.log_x)) {
    const double x = px(v);
    out += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(x) +
           "\" y2=\"" + fixed(top + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(top + ph + 18) +
           "\" text-anchor=\"middle\">" + tick_label(v, plot.log_x) + "</text>\n";
  }
  for (double v : ticks(ry, plot.log_y)) {
    const double y = py(v);
    out += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left) +
           "\" y2=\"" + fixed(y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(y + 4) + "\" text-anchor=\"end\">" +
           tick_label(v, plot.log_y) + "</text>\n";
  }
  out += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(height - 10.0) +
         "\" text-anchor=\"middle\">" + escape(plot.x_label) + "</text>\n";
  out += "<text transform=\"translate(16," + fixed(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(plot.y_label) + "</text>\n";

  double legend_y = top + 10.0;
  for (const auto& s : plot.series) {
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!usable(x, y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fixed(px(tx(x))) + "," + fixed(py(ty(y)));
    }
    if (!pts.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"";
      if (s.dashed) out += " stroke-dasharray=\"5,3\"";
      out += " points=\"" + pts + "\"/>\n";
      if (s.markers) {
        for (const auto& [x, y] : s.points) {
          if (!usable(x, y)) continue;
          out += "<circle cx=\"" + fixed(px(tx(x))) + "\" cy=\"" + fixed(py(ty(y))) +
                 "\" r=\"2\" fill=\"" + s.color + "\"/>\n";
        }
      }
    }
    const double lx = left + pw + 12.0;
    out += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(legend_y) + "\" x2=\"" + fixed(lx + 20) +
           "\" y2=\"" + fixed(legend_y) + "\" stroke=\"" + s.color + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
    out += "<text x=\"" + fixed(lx + 26) + "\" y=\"" + fixed(legend_y + 4) + "\">" +
           escape(s.label) + "</text>\n";
    legend_y += 16.0;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace shubin::svg
