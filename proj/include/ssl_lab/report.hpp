#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ssl_lab/experiments.hpp"

namespace ssllab {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> lo;  // optional band, same length as y when present
    std::vector<double> hi;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 420;
};

std::string xml_escape(std::string_view text);

/// Standalone SVG document with one polyline per series and shaded bands.
/// Points that cannot be shown on a log axis are dropped.
std::string render_line_chart(const std::vector<Series>& series, const ChartSpec& spec);

/// Mean +- std of `metric` for every method in the sweep.
std::vector<Series> sweep_series(const SweepResult& sweep, Metric metric);

/// mean(a) - mean(b) per cell.
Series gap_series(const SweepResult& sweep, Method a, Method b, Metric metric);

std::string_view metric_label(Metric metric) noexcept;

}  // namespace ssllab
