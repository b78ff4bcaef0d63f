#include "crop/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace crop {

std::vector<BandPoint> confidence_band(std::span<const std::vector<MetricRecord>> runs,
                                       bool use_validation, double z) {
  std::map<long, std::vector<double>> by_step;
  for (const auto& run : runs)
    for (const MetricRecord& rec : run)
      by_step[rec.step].push_back(use_validation ? rec.validation_return
                                                 : rec.evaluation_return);

  std::vector<BandPoint> band;
  band.reserve(by_step.size());
  for (const auto& [step, values] : by_step) {
    BandPoint point;
    point.step = step;
    point.n = static_cast<int>(values.size());
    for (const double v : values) point.mean += v;
    point.mean /= values.size();
    if (values.size() > 1) {
      double var = 0.0;
      for (const double v : values) var += (v - point.mean) * (v - point.mean);
      const double sd = std::sqrt(var / (values.size() - 1));
      point.half_width = z * sd / std::sqrt(static_cast<double>(values.size()));
    }
    band.push_back(point);
  }
  return band;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#17becf", "#2ca02c", "#bcbd22",
                                    "#d62728", "#ff7f0e", "#9467bd", "#8c564b"};

// Colors follow the published figures where the label identifies the method.
std::string series_color(const std::string& label, size_t index) {
  const auto contains = [&](const char* what) { return label.find(what) != std::string::npos; };
  if (contains("radius")) return "#1f77b4";
  if (contains("action")) return "#17becf";
  if (contains("object")) return "#2ca02c";
  if (contains("rad")) return "#bcbd22";
  if (contains("a2c")) return "#ff7f0e";
  if (contains("fo")) return "#d62728";
  return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string fmt(double v) {
  std::ostringstream out;
  out << (std::abs(v - std::round(v)) < 1e-9 ? std::round(v) : v);
  return out.str();
}

struct Scale {
  double x0, x1, y0, y1;  // data range
  double px0, px1, py0, py1;  // pixel range (y flipped)
  double x(double v) const { return px0 + (v - x0) / (x1 - x0) * (px1 - px0); }
  double y(double v) const { return py0 + (v - y0) / (y1 - y0) * (py1 - py0); }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts) {
  std::ostringstream out;
  for (const auto& [x, y] : pts) out << x << ',' << y << ' ';
  return out.str();
}

double nice_tick(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_curves_svg(std::span<const CurveSeries> series, const PlotOptions& options) {
  // Collect bands first to size the axes.
  struct Prepared {
    std::string label, color;
    std::vector<BandPoint> validation, evaluation;
  };
  std::vector<Prepared> prepared;
  double x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool any = false;
  for (size_t i = 0; i < series.size(); ++i) {
    Prepared p;
    p.label = series[i].label;
    p.color = series_color(series[i].label, i);
    if (options.show_validation) p.validation = confidence_band(series[i].runs, true);
    if (options.show_evaluation) p.evaluation = confidence_band(series[i].runs, false);
    for (const auto* band : {&p.validation, &p.evaluation}) {
      for (const BandPoint& pt : *band) {
        x_max = std::max(x_max, static_cast<double>(pt.step));
        const double lo = pt.mean - pt.half_width;
        const double hi = pt.mean + pt.half_width;
        y_min = any ? std::min(y_min, lo) : lo;
        y_max = any ? std::max(y_max, hi) : hi;
        any = true;
      }
    }
    prepared.push_back(std::move(p));
  }
  if (options.threshold) {
    y_min = std::min(y_min, *options.threshold);
    y_max = std::max(y_max, *options.threshold);
  }
  const double pad = std::max(1.0, 0.05 * (y_max - y_min));
  y_min -= pad;
  y_max += pad;

  const double w = options.width, h = options.height;
  const Scale scale{0.0, x_max, y_min, y_max, 70.0, w - 20.0, h - 45.0, 30.0};

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "' viewBox='0 0 " << w << ' ' << h << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  if (!options.title.empty())
    svg << "<text x='" << w / 2 << "' y='18' text-anchor='middle' font-size='14' "
           "font-family='sans-serif'>" << options.title << "</text>\n";

  // Axes and ticks.
  svg << "<g stroke='#888' stroke-width='1'>"
      << "<line x1='70' y1='" << h - 45 << "' x2='" << w - 20 << "' y2='" << h - 45 << "'/>"
      << "<line x1='70' y1='30' x2='70' y2='" << h - 45 << "'/></g>\n";
  const double xt = nice_tick(x_max);
  for (double v = 0.0; v <= x_max + 1e-9; v += xt) {
    const double px = scale.x(v);
    svg << "<line x1='" << px << "' y1='" << h - 45 << "' x2='" << px << "' y2='" << h - 41
        << "' stroke='#888'/><text x='" << px << "' y='" << h - 28
        << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << fmt(v)
        << "</text>\n";
  }
  const double yt = nice_tick(y_max - y_min);
  for (double v = std::ceil(y_min / yt) * yt; v <= y_max + 1e-9; v += yt) {
    const double py = scale.y(v);
    svg << "<line x1='66' y1='" << py << "' x2='70' y2='" << py
        << "' stroke='#888'/><text x='62' y='" << py + 4
        << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << fmt(v)
        << "</text>\n";
  }
  svg << "<text x='" << (70 + w - 20) / 2 << "' y='" << h - 8
      << "' text-anchor='middle' font-size='12' font-family='sans-serif'>environment steps"
         "</text>\n"
      << "<text x='16' y='" << (30 + h - 45) / 2
      << "' text-anchor='middle' font-size='12' font-family='sans-serif' transform='rotate(-90 "
         "16 " << (30 + h - 45) / 2 << ")'>return</text>\n";

  if (options.threshold) {
    const double py = scale.y(*options.threshold);
    svg << "<line x1='70' y1='" << py << "' x2='" << w - 20 << "' y2='" << py
        << "' stroke='#444' stroke-dasharray='2,4'/>\n";
  }

  const auto draw_band = [&](const std::vector<BandPoint>& band, const std::string& color,
                             bool dashed) {
    if (band.empty()) return;
    std::vector<std::pair<double, double>> upper, lower, mean;
    for (const BandPoint& pt : band) {
      const double px = scale.x(static_cast<double>(pt.step));
      upper.emplace_back(px, scale.y(pt.mean + pt.half_width));
      lower.emplace_back(px, scale.y(pt.mean - pt.half_width));
      mean.emplace_back(px, scale.y(pt.mean));
    }
    std::reverse(lower.begin(), lower.end());
    svg << "<polygon points='" << polyline(upper) << polyline(lower) << "' fill='" << color
        << "' fill-opacity='0.15' stroke='none'/>\n";
    svg << "<polyline points='" << polyline(mean) << "' fill='none' stroke='" << color
        << "' stroke-width='1.8'" << (dashed ? " stroke-dasharray='6,4'" : "") << "/>\n";
  };

  for (const Prepared& p : prepared) {
    draw_band(p.validation, p.color, false);
    draw_band(p.evaluation, p.color, true);
  }

  // Legend.
  double ly = 40.0;
  for (const Prepared& p : prepared) {
    svg << "<line x1='" << w - 170 << "' y1='" << ly << "' x2='" << w - 140 << "' y2='" << ly
        << "' stroke='" << p.color << "' stroke-width='2'/><text x='" << w - 134 << "' y='"
        << ly + 4 << "' font-size='11' font-family='sans-serif'>" << p.label << "</text>\n";
    ly += 16.0;
  }

  svg << "</svg>\n";
  return svg.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open file for writing: " + path);
  file << content;
  if (!file) throw std::runtime_error("write failed: " + path);
}

}  // namespace crop
