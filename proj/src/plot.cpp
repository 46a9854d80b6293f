#include "matd/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "matd/errors.hpp"

namespace matd {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr double kWidth = 760.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 20.0, kBottom = 50.0;

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

}  // namespace

std::string render_plot_svg(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw PreconditionViolation("plot: no input series");

  double k_max = 1.0;
  double log_lo = std::numeric_limits<double>::infinity();
  double log_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    if (s.data.k.empty()) throw PreconditionViolation("plot: empty series '" + s.label + "'");
    k_max = std::max(k_max, static_cast<double>(s.data.k.back()));
    for (double v : s.data.mean) {
      if (v > 0.0) {
        log_lo = std::min(log_lo, std::log10(v));
        log_hi = std::max(log_hi, std::log10(v));
      }
    }
  }
  if (!std::isfinite(log_lo)) {
    log_lo = -1.0;
    log_hi = 1.0;
  }
  if (log_hi - log_lo < 1e-9) {
    log_lo -= 0.5;
    log_hi += 0.5;
  }
  const double floor_value = std::pow(10.0, log_lo);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](double k) { return kLeft + plot_w * k / k_max; };
  const auto y_of = [&](double v) {
    const double lv = std::log10(std::max(v, floor_value));
    return kTop + plot_h * (log_hi - lv) / (log_hi - log_lo);
  };

  std::string svg = fmt(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "viewBox=\"0 0 %g %g\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += fmt("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kLeft,
             kTop, kLeft, kTop + plot_h);
  svg += fmt("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kLeft,
             kTop + plot_h, kLeft + plot_w, kTop + plot_h);

  // y tick labels at decades, x labels at 0 and k_max
  for (int d = static_cast<int>(std::ceil(log_lo)); d <= static_cast<int>(std::floor(log_hi)); ++d) {
    const double y = kTop + plot_h * (log_hi - d) / (log_hi - log_lo);
    svg += fmt("<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#cccccc\"/>\n",
               kLeft, y, kLeft + plot_w, y);
    svg += fmt("<text x=\"%g\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">1e%d</text>\n",
               kLeft - 6.0, y + 4.0, d);
  }
  svg += fmt("<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">0</text>\n",
             kLeft, kTop + plot_h + 16.0);
  svg += fmt("<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%g</text>\n",
             kLeft + plot_w, kTop + plot_h + 16.0, k_max);
  svg += fmt("<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">iteration k"
             "</text>\n",
             kLeft + plot_w / 2.0, kHeight - 12.0);
  svg += fmt("<text x=\"16\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" "
             "transform=\"rotate(-90 16 %g)\">mean squared error</text>\n",
             kTop + plot_h / 2.0, kTop + plot_h / 2.0);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (std::size_t j = 0; j < series[i].data.k.size(); ++j) {
      points += fmt("%.2f,%.2f ", x_of(static_cast<double>(series[i].data.k[j])),
                    y_of(series[i].data.mean[j]));
    }
    svg += fmt("<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.2\" points=\"", color);
    svg += points;
    svg += "\"/>\n";
    const double ly = kTop + 16.0 + 16.0 * static_cast<double>(i);
    svg += fmt("<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"%s\" "
               "stroke-width=\"2\"/>\n",
               kLeft + plot_w - 150.0, ly - 4.0, kLeft + plot_w - 126.0, ly - 4.0, color);
    svg += fmt("<text x=\"%g\" y=\"%.2f\" font-size=\"11\">%s</text>\n",
               kLeft + plot_w - 120.0, ly, series[i].label.c_str());
  }
  svg += "</svg>\n";
  return svg;
}

std::string plot_data_csv(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw PreconditionViolation("plot: no input series");
  std::string out = "series,k,mean_delta_sq,stderr\n";
  for (const auto& s : series)
    for (std::size_t j = 0; j < s.data.k.size(); ++j)
      out += fmt("%s,%ld,%.17g,%.17g\n", s.label.c_str(), s.data.k[j], s.data.mean[j],
                 s.data.std_error[j]);
  return out;
}

}  // namespace matd
