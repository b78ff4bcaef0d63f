#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crop/metrics.hpp"

namespace crop {

// One method's runs: each entry is a seed's metric log.
struct CurveSeries {
  std::string label;
  std::vector<std::vector<MetricRecord>> runs;
};

struct BandPoint {
  long step = 0;
  double mean = 0.0;
  double half_width = 0.0;  // z * sd / sqrt(n)
  int n = 0;
};

// Mean across seeds per step with the z-scaled standard error (95% band at
// z=1.96). Steps present in only some runs average over the runs that have
// them.
std::vector<BandPoint> confidence_band(std::span<const std::vector<MetricRecord>> runs,
                                       bool use_validation, double z = 1.96);

struct PlotOptions {
  std::string title;
  std::optional<double> threshold;  // dotted horizontal line
  bool show_validation = true;      // solid lines
  bool show_evaluation = true;      // dashed lines
  int width = 880;
  int height = 540;
};

// Self-contained SVG: per-series mean curves with shaded confidence bands.
std::string render_curves_svg(std::span<const CurveSeries> series, const PlotOptions& options);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace crop
