#pragma once

#include <optional>
#include <string>
#include <vector>

namespace oneshot::svg {

// Geometry constants are part of the tested contract: a bar's rect height
// is exactly value * plot_height, so reports can be checked against the
// numbers that produced them.
struct BarChartLayout {
    double plot_height = 400.0;
    double bar_width = 18.0;
    double bar_gap = 4.0;
    double group_gap = 26.0;
    double margin_left = 64.0;
    double margin_top = 58.0;
    double margin_bottom = 96.0;
    double legend_width = 190.0;
};

// Grouped bars: one group per row name (model), one bar per series name
// (featurizer). Values are in [0, 1]; a missing value renders a hatched
// placeholder instead of a bar. Self-contained SVG, no external assets.
std::string grouped_bar_chart(const std::vector<std::string>& group_names,
                              const std::vector<std::string>& series_names,
                              const std::vector<std::vector<std::optional<double>>>& values,
                              const std::string& title,
                              const BarChartLayout& layout = {});

struct HeatmapLayout {
    double cell_width = 118.0;
    double cell_height = 46.0;
    double margin_left = 70.0;
    double margin_top = 96.0;
    double margin_right = 24.0;
    double margin_bottom = 28.0;
};

// Row-by-column matrix of cells colored by a monotone white-to-blue scale
// over [0, 1], each annotated with its 4-decimal value.
std::string heatmap(const std::vector<std::string>& row_names,
                    const std::vector<std::string>& col_names,
                    const std::vector<std::vector<std::optional<double>>>& values,
                    const std::string& title,
                    const HeatmapLayout& layout = {});

// Linear interpolation from #ffffff at 0 to #08306b at 1.
std::string heat_color(double value);

std::string escape_text(const std::string& text);

}  // namespace oneshot::svg
