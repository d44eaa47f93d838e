#include "cspda/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cspda {

namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 78.0;
constexpr double kRight = 790.0;
constexpr double kTop = 52.0;
constexpr double kBottom = 460.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Scale {
    double lo = 0.0, hi = 1.0, px_lo = 0.0, px_hi = 1.0;
    double operator()(double v) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
        out.push_back(v);
    return out;
}

}  // namespace

std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            x_lo = std::min(x_lo, s.x[k]);
            x_hi = std::max(x_hi, s.x[k]);
            const double half = s.spread.empty() ? 0.0 : s.spread[k];
            y_lo = std::min(y_lo, s.y[k] - half);
            y_hi = std::max(y_hi, s.y[k] + half);
        }
    }
    if (!(x_lo < x_hi)) x_hi = x_lo + 1.0;
    if (!(y_lo < y_hi)) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const Scale sx{x_lo, x_hi, kLeft, kRight};
    const Scale sy{y_lo, y_hi, kBottom, kTop};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(kHeight) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"17\">" << title << "</text>\n";

    // Gridlines and tick labels.
    for (double tx : ticks(x_lo, x_hi)) {
        const double px = sx(tx);
        svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kBottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(tx)
            << "</text>\n";
    }
    for (double ty : ticks(y_lo, y_hi)) {
        const double py = sy(ty);
        svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kRight)
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(ty)
            << "</text>\n";
    }
    svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
        << fmt(kRight - kLeft) << "\" height=\"" << fmt(kBottom - kTop)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    // Bands first so lines draw on top.
    for (const auto& s : series) {
        if (s.spread.empty() || s.x.empty()) continue;
        svg << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.18\" stroke=\"none\" "
            << "points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            svg << fmt(sx(s.x[k])) << "," << fmt(sy(s.y[k] + s.spread[k])) << " ";
        for (std::size_t k = s.x.size(); k-- > 0;)
            svg << fmt(sx(s.x[k])) << "," << fmt(sy(s.y[k] - s.spread[k])) << " ";
        svg << "\"/>\n";
    }
    for (const auto& s : series) {
        if (s.x.empty()) continue;
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" "
            << "points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            svg << fmt(sx(s.x[k])) << "," << fmt(sy(s.y[k])) << " ";
        svg << "\"/>\n";
    }

    // Legend.
    double ly = kTop + 16;
    for (const auto& s : series) {
        svg << "<line x1=\"" << fmt(kLeft + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(kLeft + 40) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2.5\"/>\n";
        svg << "<text x=\"" << fmt(kLeft + 46) << "\" y=\"" << fmt(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"13\">" << s.label << "</text>\n";
        ly += 18;
    }

    svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"" << fmt(kHeight - 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << x_label
        << "</text>\n";
    svg << "<text x=\"20\" y=\"" << fmt((kTop + kBottom) / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        << "transform=\"rotate(-90 20 " << fmt((kTop + kBottom) / 2) << ")\">" << y_label
        << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << render_svg_plot(title, x_label, y_label, series);
}

}  // namespace cspda
