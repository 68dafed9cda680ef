#include "sirs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sirs {

namespace {

constexpr double kWidth = 860.0, kHeight = 520.0;
constexpr double kLeft = 70.0, kRight = 830.0, kTop = 50.0, kBottom = 460.0;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                      const std::string& x_label, const std::string& y_label) {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    bool any = false;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!any) {
                x_min = x_max = s.x[k];
                y_min = y_max = s.y[k];
                any = true;
            }
            x_min = std::min(x_min, s.x[k]);
            x_max = std::max(x_max, s.x[k]);
            y_min = std::min(y_min, s.y[k]);
            y_max = std::max(y_max, s.y[k]);
        }
    }
    if (x_max <= x_min) x_max = x_min + 1.0;
    if (y_max <= y_min) y_max = y_min + 1.0;
    y_max += 0.05 * (y_max - y_min);

    const auto px = [&](double x) {
        return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft);
    };
    const auto py = [&](double y) {
        return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write chart: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(kHeight) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Axes with 6 ticks each.
    out << "<g stroke=\"black\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(kRight)
        << "\" y2=\"" << fmt(kBottom) << "\"/>\n";
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
        << "\" y2=\"" << fmt(kBottom) << "\"/>\n";
    out << "</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    for (int t = 0; t <= 5; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 5.0;
        const double fy = y_min + (y_max - y_min) * t / 5.0;
        out << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(kBottom) << "\" x2=\""
            << fmt(px(fx)) << "\" y2=\"" << fmt(kBottom + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(kBottom + 18)
            << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
        out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py(fy)) << "\" x2=\""
            << fmt(kLeft) << "\" y2=\"" << fmt(py(fy)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py(fy) + 4)
            << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"" << fmt(kHeight - 14)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << fmt((kTop + kBottom) / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << fmt((kTop + kBottom) / 2) << ")\">" << y_label << "</text>\n";
    out << "</g>\n";

    for (const auto& mk : markers) {
        out << "<line x1=\"" << fmt(px(mk.x)) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
            << fmt(px(mk.x)) << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"" << mk.color
            << "\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
        if (!mk.label.empty())
            out << "<text x=\"" << fmt(px(mk.x) + 3) << "\" y=\"" << fmt(kTop + 12)
                << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << mk.color << "\">"
                << mk.label << "</text>\n";
    }

    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"6 3\"";
        out << " points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (k) out << ' ';
            out << fmt(px(s.x[k])) << ',' << fmt(py(s.y[k]));
        }
        out << "\"/>\n";
    }

    // Legend, top right.
    double ly = kTop + 8.0;
    for (const auto& s : series) {
        out << "<line x1=\"" << fmt(kRight - 150) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(kRight - 120) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"";
        if (s.dashed) out << " stroke-dasharray=\"6 3\"";
        out << "/>\n";
        out << "<text x=\"" << fmt(kRight - 114) << "\" y=\"" << fmt(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        ly += 16.0;
    }
    out << "</svg>\n";
}

}  // namespace sirs
