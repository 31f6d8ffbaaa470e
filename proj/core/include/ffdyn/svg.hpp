#pragma once

#include <string>
#include <vector>

namespace ffdyn {

// One polyline on a chart. band, when non-empty, holds a symmetric
// half-width per point (drawn as a translucent ribbon).
struct ChartSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> band;
};

// Self-contained SVG line chart with axes, ticks and a legend. Output
// is a pure function of the inputs (fixed size, palette and number
// formatting), so re-rendering identical data is byte-identical.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series);

}  // namespace ffdyn
