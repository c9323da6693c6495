#include "moire/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <system_error>

namespace moire {

namespace {

constexpr int chart_width = 800;
constexpr int chart_height = 500;
constexpr double margin_left = 72;
constexpr double margin_right = 24;
constexpr double margin_top = 20;
constexpr double margin_bottom = 52;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fixed2(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", v);
    return buffer;
}

std::string compact(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.6g", v);
    return buffer;
}

struct Range {
    double lo, hi;
    double span() const { return hi - lo; }
};

Range padded_range(double lo, double hi) {
    if (lo == hi) { // degenerate data still needs a drawable window
        const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.5;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

std::vector<double> nice_ticks(const Range& range) {
    const double rough = range.span() / 4.0;
    const double magnitude = std::pow(10.0, std::floor(std::log10(rough)));
    double step = magnitude;
    for (double factor : {1.0, 2.0, 5.0, 10.0}) {
        if (magnitude * factor >= rough) {
            step = magnitude * factor;
            break;
        }
    }
    std::vector<double> ticks;
    double t = std::ceil(range.lo / step) * step;
    for (; t <= range.hi + 1e-12 * range.span(); t += step) {
        if (std::abs(t) < 1e-12 * range.span())
            t = 0.0; // avoid "-0" labels
        ticks.push_back(t);
    }
    return ticks;
}

void append_atomically(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path temp = path.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open " + temp.string() + " for writing");
        out << contents;
        if (!out)
            throw IoError("write failed for " + temp.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec)
        throw IoError("cannot rename " + temp.string() + " to " + path.string() + ": " +
                      ec.message());
}

} // namespace

std::filesystem::path emit_svg(const std::vector<Series>& series, const ChartSpec& spec,
                               const std::filesystem::path& path) {
    if (series.empty())
        throw std::invalid_argument("emit_svg: at least one series is required");
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw std::invalid_argument("emit_svg: series '" + s.label +
                                        "' is empty or has mismatched x/y lengths");
    }

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (double v : s.x) {
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        for (double v : s.y) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    const Range xr = padded_range(x_min, x_max);
    const Range yr = padded_range(y_min, y_max);

    const double plot_w = chart_width - margin_left - margin_right;
    const double plot_h = chart_height - margin_top - margin_bottom;
    auto px = [&](double x) { return margin_left + (x - xr.lo) / xr.span() * plot_w; };
    auto py = [&](double y) { return margin_top + (yr.hi - y) / yr.span() * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";

    // frame
    svg += "<rect x=\"" + fixed2(margin_left) + "\" y=\"" + fixed2(margin_top) + "\" width=\"" +
           fixed2(plot_w) + "\" height=\"" + fixed2(plot_h) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (double t : nice_ticks(xr)) {
        const double x = px(t);
        svg += "<line x1=\"" + fixed2(x) + "\" y1=\"" + fixed2(margin_top + plot_h) + "\" x2=\"" +
               fixed2(x) + "\" y2=\"" + fixed2(margin_top + plot_h + 5) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fixed2(x) + "\" y=\"" + fixed2(margin_top + plot_h + 18) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               compact(t) + "</text>\n";
    }
    for (double t : nice_ticks(yr)) {
        const double y = py(t);
        svg += "<line x1=\"" + fixed2(margin_left - 5) + "\" y1=\"" + fixed2(y) + "\" x2=\"" +
               fixed2(margin_left) + "\" y2=\"" + fixed2(y) +
               "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fixed2(margin_left - 8) + "\" y=\"" + fixed2(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + compact(t) +
               "</text>\n";
    }

    svg += "<text x=\"" + fixed2(margin_left + plot_w / 2) + "\" y=\"" +
           fixed2(chart_height - 14.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" + spec.x_label +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + fixed2(margin_top + plot_h / 2) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           fixed2(margin_top + plot_h / 2) + ")\">" + spec.y_label + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % (sizeof palette / sizeof palette[0])];
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i)
                svg += ' ';
            svg += fixed2(px(s.x[i])) + "," + fixed2(py(s.y[i]));
        }
        svg += "\"/>\n";
    }

    // legend, top-right corner of the plot area
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = palette[k % (sizeof palette / sizeof palette[0])];
        const double y = margin_top + 16 + 16 * static_cast<double>(k);
        const double x = margin_left + plot_w - 150;
        svg += "<line x1=\"" + fixed2(x) + "\" y1=\"" + fixed2(y - 4) + "\" x2=\"" +
               fixed2(x + 24) + "\" y2=\"" + fixed2(y - 4) + "\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + fixed2(x + 30) + "\" y=\"" + fixed2(y) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + series[k].label + "</text>\n";
    }

    svg += "</svg>\n";
    append_atomically(path, svg);
    return path;
}

} // namespace moire
