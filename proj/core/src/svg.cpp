#include "ffdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ffdyn/errors.hpp"

namespace ffdyn {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 52.0;

const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                          "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

std::string num(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

std::string escape_text(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Scale {
    double lo = 0.0, hi = 1.0, px_lo = 0.0, px_hi = 1.0;
    double operator()(double v) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

// Round tick step: 1, 2 or 5 times a power of ten covering the span.
double tick_step(double span) {
    double raw = span / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double r = raw / mag;
    if (r < 1.5) return mag;
    if (r < 3.5) return 2.0 * mag;
    if (r < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series) {
    if (series.empty()) throw InvalidArgument("render_line_chart: no series");

    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool first = true;
    for (const ChartSeries& s : series) {
        if (s.xs.size() != s.ys.size() || (!s.band.empty() && s.band.size() != s.ys.size())) {
            throw ShapeError("render_line_chart: series '" + s.label + "' length mismatch");
        }
        if (s.xs.empty()) throw InvalidArgument("render_line_chart: empty series");
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            double half = s.band.empty() ? 0.0 : s.band[i];
            double lo = s.ys[i] - half, hi = s.ys[i] + half;
            if (first) {
                x_min = x_max = s.xs[i];
                y_min = lo;
                y_max = hi;
                first = false;
            } else {
                x_min = std::min(x_min, s.xs[i]);
                x_max = std::max(x_max, s.xs[i]);
                y_min = std::min(y_min, lo);
                y_max = std::max(y_max, hi);
            }
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    double pad = (y_max - y_min) * 0.05;
    if (pad == 0.0) pad = 0.5;
    y_min -= pad;
    y_max += pad;

    Scale sx{x_min, x_max, kMarginLeft, kWidth - kMarginRight};
    Scale sy{y_min, y_max, kHeight - kMarginBottom, kMarginTop};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
        << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape_text(title) << "</text>\n";

    // Axes.
    svg << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(kHeight - kMarginBottom)
        << "\" x2=\"" << num(kWidth - kMarginRight) << "\" y2=\"" << num(kHeight - kMarginBottom)
        << "\" stroke=\"#333\"/>\n";
    svg << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(kMarginTop) << "\" x2=\""
        << num(kMarginLeft) << "\" y2=\"" << num(kHeight - kMarginBottom)
        << "\" stroke=\"#333\"/>\n";

    double xstep = tick_step(x_max - x_min);
    for (double t = std::ceil(x_min / xstep) * xstep; t <= x_max + 1e-9; t += xstep) {
        double px = sx(t);
        svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(kHeight - kMarginBottom)
            << "\" x2=\"" << num(px) << "\" y2=\"" << num(kHeight - kMarginBottom + 5)
            << "\" stroke=\"#333\"/>\n";
        svg << "<text x=\"" << num(px) << "\" y=\"" << num(kHeight - kMarginBottom + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(t)
            << "</text>\n";
    }
    double ystep = tick_step(y_max - y_min);
    for (double t = std::ceil(y_min / ystep) * ystep; t <= y_max + 1e-9; t += ystep) {
        double py = sy(t);
        svg << "<line x1=\"" << num(kMarginLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\""
            << num(kMarginLeft) << "\" y2=\"" << num(py) << "\" stroke=\"#333\"/>\n";
        svg << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(py) << "\" x2=\""
            << num(kWidth - kMarginRight) << "\" y2=\"" << num(py)
            << "\" stroke=\"#eee\"/>\n";
        svg << "<text x=\"" << num(kMarginLeft - 8) << "\" y=\"" << num(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(t)
            << "</text>\n";
    }
    svg << "<text x=\"" << num((kMarginLeft + kWidth - kMarginRight) / 2) << "\" y=\""
        << num(kHeight - 12) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << escape_text(x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << num((kMarginTop + kHeight - kMarginBottom) / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << num((kMarginTop + kHeight - kMarginBottom) / 2)
        << ")\">" << escape_text(y_label) << "</text>\n";

    // Bands first so every line draws on top of every ribbon.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const ChartSeries& s = series[si];
        if (s.band.empty()) continue;
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            svg << num(sx(s.xs[i])) << ',' << num(sy(s.ys[i] + s.band[i])) << ' ';
        }
        for (std::size_t i = s.xs.size(); i-- > 0;) {
            svg << num(sx(s.xs[i])) << ',' << num(sy(s.ys[i] - s.band[i]));
            if (i != 0) svg << ' ';
        }
        svg << "\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const ChartSeries& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            svg << num(sx(s.xs[i])) << ',' << num(sy(s.ys[i]));
            if (i + 1 != s.xs.size()) svg << ' ';
        }
        svg << "\"/>\n";
    }

    // Legend, top-right corner of the plot area.
    double lx = kWidth - kMarginRight - 140.0;
    double ly = kMarginTop + 8.0;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        double y = ly + static_cast<double>(si) * 16.0;
        svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(y) << "\" x2=\"" << num(lx + 18)
            << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(lx + 24) << "\" y=\"" << num(y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_text(series[si].label)
            << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ffdyn
