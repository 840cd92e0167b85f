#include "te/svg.hpp"

#include <algorithm>
#include <cmath>

#include "te/util.hpp"

namespace te::svg {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

std::string header(const std::string& title, const std::string& x_label, const std::string& y_label) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                  num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
       escape(x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kHeight / 2) + ")\">" + escape(y_label) + "</text>\n";
  return s;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x1 == x0 ? 0.5 : (x - x0) / (x1 - x0)) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string y_axis(const Frame& f) {
  std::string s;
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
       num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(y) + 4) + "\" text-anchor=\"end\">" +
         format_fixed(y, 2) + "</text>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(f.py(y)) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" +
         num(f.py(y)) + "\" stroke=\"#ddd\"/>\n";
  }
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(kWidth - kRight) +
       "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, double y_min, double y_max) {
  double x0 = INFINITY, x1 = -INFINITY;
  for (const auto& sr : series) {
    for (const auto& [x, y] : sr.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
  }
  if (!std::isfinite(x0)) x0 = x1 = 0;
  const Frame f{x0, x1, y_min, y_max};
  std::string s = header(title, x_label, y_label) + y_axis(f);
  for (int i = 0; i <= 5; ++i) {
    const double x = x0 + (x1 - x0) * i / 5.0;
    s += "<text x=\"" + num(f.px(x)) + "\" y=\"" + num(kHeight - kBottom + 16) + "\" text-anchor=\"middle\">" +
         format_fixed(x, x1 - x0 >= 5 ? 0 : 1) + "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (const auto& [x, y] : series[k].points) {
      if (!std::isfinite(y)) continue;
      pts += num(f.px(x)) + "," + num(f.py(y)) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
         "\"/>\n";
    s += "<text x=\"" + num(kWidth - kRight - 4) + "\" y=\"" + num(kTop + 14 * static_cast<double>(k + 1)) +
         "\" text-anchor=\"end\" fill=\"" + color + "\">" + escape(series[k].label) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                      const std::vector<double>& values, double y_max) {
  const Frame f{0, 1, 0, y_max};
  std::string s = header(title, "", y_label) + y_axis(f);
  const double slot = (kWidth - kLeft - kRight) / std::max<std::size_t>(1, labels.size());
  for (std::size_t i = 0; i < labels.size() && i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? std::clamp(values[i], 0.0, y_max) : 0.0;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(f.py(v)) + "\" width=\"" + num(slot * 0.7) + "\" height=\"" +
         num(f.py(0) - f.py(v)) + "\" fill=\"" + kColors[i % std::size(kColors)] + "\"/>\n";
    s += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\">" + escape(labels[i]) + "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace te::svg
