#pragma once

// Standalone SVG 1.1 plot of mean_gap and bound against k on a fixed
// 800x500 canvas, with an optional log10 y-axis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwdgrad/harness/aggregate.hpp"
#include "fwdgrad/harness/csv.hpp"

namespace fwdgrad::harness {

struct SvgOptions {
    bool log_y = false;
    std::string title = "Mean gap and theoretical bound";
};

namespace detail {

inline constexpr double kWidth = 800.0;
inline constexpr double kHeight = 500.0;
inline constexpr double kLeft = 90.0;
inline constexpr double kRight = 20.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 60.0;

inline std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace detail

inline std::string svg_document(const AggregateTrace& trace, const SvgOptions& opts = {}) {
    using namespace detail;
    if (trace.empty()) {
        throw std::invalid_argument("render_svg needs a nonempty trace");
    }

    std::vector<double> gap;
    std::vector<double> bound;
    for (const AggregateRow& r : trace.rows) {
        gap.push_back(r.mean_gap);
        bound.push_back(r.bound);
    }

    std::size_t clamped = 0;
    double floor_value = 0.0;
    if (opts.log_y) {
        double min_positive = std::numeric_limits<double>::infinity();
        for (const auto* series : {&gap, &bound}) {
            for (double v : *series) {
                if (v > 0.0 && std::isfinite(v)) {
                    min_positive = std::min(min_positive, v);
                }
            }
        }
        floor_value = std::isfinite(min_positive) ? min_positive : 1.0;
        for (auto* series : {&gap, &bound}) {
            for (double& v : *series) {
                if (!(v > 0.0) && !std::isnan(v)) {
                    v = floor_value;
                    ++clamped;
                }
            }
        }
    }
    auto transform = [&](double v) { return opts.log_y ? std::log10(v) : v; };

    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -std::numeric_limits<double>::infinity();
    for (const auto* series : {&gap, &bound}) {
        for (double v : *series) {
            if (std::isfinite(v)) {
                y_lo = std::min(y_lo, transform(v));
                y_hi = std::max(y_hi, transform(v));
            }
        }
    }
    if (!std::isfinite(y_lo)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (y_hi - y_lo <= 0.0) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    const double x_lo = static_cast<double>(trace.rows.front().k);
    double x_hi = static_cast<double>(trace.rows.back().k);
    if (x_hi <= x_lo) {
        x_hi = x_lo + 1.0;
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double k) { return kLeft + (k - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double t) { return kTop + (y_hi - t) / (y_hi - y_lo) * plot_h; };

    auto polyline = [&](const std::vector<double>& series, const char* color, const char* id) {
        std::string pts;
        for (std::size_t j = 0; j < series.size(); ++j) {
            if (!std::isfinite(series[j])) {
                continue;
            }
            if (!pts.empty()) {
                pts += ' ';
            }
            pts += fixed3(px(static_cast<double>(trace.rows[j].k))) + "," + fixed3(py(transform(series[j])));
        }
        return std::string("  <polyline id=\"") + id + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\">\n";
    s += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    s += "  <text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape_xml(opts.title) + "</text>\n";

    // Axes.
    const std::string x0 = fixed3(kLeft);
    const std::string x1 = fixed3(kLeft + plot_w);
    const std::string y0 = fixed3(kTop);
    const std::string y1 = fixed3(kTop + plot_h);
    s += "  <g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    s += "    <line x1=\"" + x0 + "\" y1=\"" + y1 + "\" x2=\"" + x1 + "\" y2=\"" + y1 + "\"/>\n";
    s += "    <line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x0 + "\" y2=\"" + y1 + "\"/>\n";
    s += "  </g>\n";

    s += "  <g id=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double k = x_lo + (x_hi - x_lo) * i / 5.0;
        const std::string x = fixed3(px(k));
        s += "    <line x1=\"" + x + "\" y1=\"" + y1 + "\" x2=\"" + x + "\" y2=\"" + fixed3(kTop + plot_h + 5) +
             "\" stroke=\"black\"/>\n";
        s += "    <text x=\"" + x + "\" y=\"" + fixed3(kTop + plot_h + 18) + "\" text-anchor=\"middle\">" +
             tick_label(k) + "</text>\n";
    }
    std::vector<double> y_ticks;
    if (opts.log_y) {
        const double first = std::ceil(y_lo);
        const double last = std::floor(y_hi);
        const double stride = std::max(1.0, std::ceil((last - first + 1.0) / 8.0));
        for (double t = first; t <= last; t += stride) {
            y_ticks.push_back(t);
        }
        if (y_ticks.empty()) {
            y_ticks = {y_lo, y_hi};
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            y_ticks.push_back(y_lo + (y_hi - y_lo) * i / 5.0);
        }
    }
    for (double t : y_ticks) {
        const std::string y = fixed3(py(t));
        const double label = opts.log_y ? std::pow(10.0, t) : t;
        s += "    <line x1=\"" + fixed3(kLeft - 5) + "\" y1=\"" + y + "\" x2=\"" + x0 + "\" y2=\"" + y +
             "\" stroke=\"black\"/>\n";
        s += "    <text x=\"" + fixed3(kLeft - 8) + "\" y=\"" + fixed3(py(t) + 4) + "\" text-anchor=\"end\">" +
             tick_label(label) + "</text>\n";
    }
    s += "  </g>\n";
    s += "  <text x=\"" + fixed3(kLeft + plot_w / 2) + "\" y=\"" + fixed3(kHeight - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">k</text>\n";
    s += std::string("  <text x=\"20\" y=\"") + fixed3(kTop + plot_h / 2) + "\" transform=\"rotate(-90 20 " +
         fixed3(kTop + plot_h / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         (opts.log_y ? "value (log10 scale)" : "value") + "</text>\n";

    s += polyline(gap, "#1f77b4", "mean_gap");
    s += polyline(bound, "#d62728", "bound");

    s += "  <g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "    <line x1=\"600\" y1=\"52\" x2=\"630\" y2=\"52\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    s += "    <text x=\"636\" y=\"56\">mean gap</text>\n";
    s += "    <line x1=\"600\" y1=\"70\" x2=\"630\" y2=\"70\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    s += "    <text x=\"636\" y=\"74\">bound</text>\n";
    s += "  </g>\n";
    if (clamped > 0) {
        s += "  <text id=\"warning\" x=\"" + fixed3(kLeft + 10) + "\" y=\"" + fixed3(kTop + 14) +
             "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#b00\">warning: " + std::to_string(clamped) +
             " nonpositive value(s) clamped to " + tick_label(floor_value) + " for the log scale</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void render_svg(const AggregateTrace& trace, const std::string& path, bool log_y) {
    SvgOptions opts;
    opts.log_y = log_y;
    const std::string doc = svg_document(trace, opts);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out.write(doc.data(), static_cast<std::streamsize>(doc.size()));
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

}  // namespace fwdgrad::harness
