#include "edgelab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace edgelab::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Axis {
    bool log = false;
    double lo = 0, hi = 1;
    double map(double v) const { return log ? std::log10(v) : v; }
    double unit(double v) const { return hi > lo ? (map(v) - lo) / (hi - lo) : 0.5; }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

std::string render(const Plot& plot) {
    Axis ax{plot.log_x}, ay{plot.log_y};
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], ax.log) || !usable(s.y[i], ay.log)) continue;
            xmin = std::min(xmin, ax.map(s.x[i]));
            xmax = std::max(xmax, ax.map(s.x[i]));
            ymin = std::min(ymin, ay.map(s.y[i]));
            ymax = std::max(ymax, ay.map(s.y[i]));
        }
    if (!(xmin <= xmax)) xmin = 0, xmax = 1;
    if (!(ymin <= ymax)) ymin = 0, ymax = 1;
    const double pad = 0.05 * std::max(ymax - ymin, 1e-12);
    ax.lo = xmin, ax.hi = xmax, ay.lo = ymin - pad, ay.hi = ymax + pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + pw * ax.unit(x); };
    auto py = [&](double y) { return kTop + ph * (1.0 - ay.unit(y)); };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
    out += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           escape(plot.title) + "</text>\n";
    out += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" + fmt("%.2f", pw) +
           "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    // Ticks at the ends and middle of each axis, labelled in data units.
    for (int i = 0; i <= 2; ++i) {
        const double u = i / 2.0;
        const double xv = ax.lo + u * (ax.hi - ax.lo), yv = ay.lo + u * (ay.hi - ay.lo);
        const double xl = ax.log ? std::pow(10.0, xv) : xv, yl = ay.log ? std::pow(10.0, yv) : yv;
        const double x = kLeft + u * pw, y = kTop + ph * (1.0 - u);
        out += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", kTop + ph + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.3g", xl) + "</text>\n";
        out += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.3g", yl) + "</text>\n";
    }
    out += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(plot.x_label) +
           (ax.log ? " (log)" : "") + "</text>\n";
    out += "<text x=\"16\" y=\"" + fmt("%.2f", kTop + ph / 2) + "\" transform=\"rotate(-90 16 " +
           fmt("%.2f", kTop + ph / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape(plot.y_label) + (ay.log ? " (log)" : "") + "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const std::string color = kColors[k % 6];
        std::string pts;
        std::string marks;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], ax.log) || !usable(s.y[i], ay.log)) continue;
            const std::string x = fmt("%.2f", px(s.x[i])), y = fmt("%.2f", py(s.y[i]));
            pts += (pts.empty() ? "" : " ") + x + "," + y;
            if (!s.reference) marks += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"2\" fill=\"" + color + "\"/>\n";
        }
        out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
               (s.reference ? std::string(" stroke-dasharray=\"6 4\"") : std::string()) + " points=\"" + pts + "\"/>\n";
        out += marks;
        const double ly = kTop + 14 + 16.0 * k;
        out += "<text x=\"" + fmt("%.2f", kLeft + pw - 8) + "\" y=\"" + fmt("%.2f", ly) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" +
               escape(s.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace edgelab::svg
