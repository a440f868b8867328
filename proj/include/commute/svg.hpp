#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace commute::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points; // (x, y), plot order
    std::string color = "#000000";
    bool dashed = false;
};

/// Horizontal guide line at a y level.
struct Guide {
    std::string label;
    double level = 0.0;
};

/// Point marker with a text label.
struct Annotation {
    std::string label;
    double x = 0.0;
    double y = 0.0;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 860;
    int height = 540;
};

/// Self-contained SVG 1.1 document, byte-deterministic for identical
/// input. Throws std::domain_error for an empty series list or
/// non-finite values.
std::string render_plot(std::span<const Series> series, std::span<const Guide> guides,
                        std::span<const Annotation> annotations, const PlotSpec& spec);

/// The plotted series as RFC-4180-style CSV (label,x,y rows).
std::string series_csv(std::span<const Series> series);

} // namespace commute::svg
