#pragma once

#include <string>
#include <vector>

#include "matd/csv.hpp"

namespace matd {

struct PlotSeries {
  std::string label;
  AggregateTrajectory data;
};

/// Line chart of mean delta_k^2 vs k, one series per cell, log-scale y.
/// Minimal deterministic SVG: fixed palette, fixed formatting, no timestamps.
std::string render_plot_svg(const std::vector<PlotSeries>& series);

/// Tidy long-format CSV: series,k,mean_delta_sq,stderr.
std::string plot_data_csv(const std::vector<PlotSeries>& series);

}  // namespace matd
