#pragma once

#include <string>
#include <vector>

namespace sirs {

/// One polyline of a chart.
struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
    bool dashed = false;
};

/// Vertical event marker.
struct SvgMarker {
    double x = 0.0;
    std::string color;
    std::string label;
};

/// Writes a fixed-size line chart. Output bytes are a pure function of the
/// inputs (fixed canvas, fixed formatting), so charts diff cleanly and can
/// be golden-file tested.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                      const std::string& x_label, const std::string& y_label);

}  // namespace sirs
