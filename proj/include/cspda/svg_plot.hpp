#pragma once

#include <string>
#include <vector>

namespace cspda {

/// Minimal static SVG line plot with optional mean +/- band series.
/// Rendering is a pure function of the inputs (fixed canvas, fixed number
/// formatting), so regenerating a plot from the same data is byte-identical.
struct PlotSeries {
    std::string label;
    std::string color;            // e.g. "#1f77b4"
    std::vector<double> x;
    std::vector<double> y;        // center line
    std::vector<double> spread;   // half band width; empty = no band
};

std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series);

void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace cspda
