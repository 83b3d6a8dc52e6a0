#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ecmc {

// One polyline on the unit square.
struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

// Renders ROC-style curves over [0,1] x [0,1] with axes, the chance
// diagonal, and a legend when the series list is small. Output depends only
// on the arguments, so files are byte-stable across runs.
std::string render_unit_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series);

}  // namespace ecmc
