#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moire/errors.hpp"

namespace moire {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartSpec {
    std::string x_label;
    std::string y_label;
};

/// Self-contained SVG line chart: one 800x500 viewBox, one polyline per
/// series, tick-labeled axes and a legend. Output is byte-deterministic for
/// identical inputs and is written atomically. An empty series list, an
/// empty series, or mismatched x/y lengths are rejected before any file is
/// touched.
std::filesystem::path emit_svg(const std::vector<Series>& series, const ChartSpec& spec,
                               const std::filesystem::path& path);

} // namespace moire
