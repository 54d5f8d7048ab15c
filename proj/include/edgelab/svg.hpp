#pragma once

#include <string>
#include <vector>

namespace edgelab::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Dashed reference line instead of markers.
    bool reference = false;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    std::vector<Series> series;
};

/// Polyline plot. Non-positive values on a log axis and non-finite values are dropped.
/// Coordinates are printed with two decimals.
std::string render(const Plot& plot);

}  // namespace edgelab::svg
