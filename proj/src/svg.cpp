#include "oneshot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "oneshot/numformat.hpp"

namespace oneshot::svg {

namespace {

const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52",
                          "#8172B3", "#937860", "#DA8BC3", "#8C8C8C"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string text_element(double x, double y, const std::string& body, int font_size,
                         const std::string& anchor, const std::string& extra = "") {
    std::string out = "  <text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
                      std::to_string(font_size) +
                      "\" font-family=\"Helvetica, Arial, sans-serif\" text-anchor=\"" + anchor +
                      "\"";
    if (!extra.empty()) out += " " + extra;
    out += ">" + escape_text(body) + "</text>\n";
    return out;
}

}  // namespace

std::string escape_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

std::string heat_color(double value) {
    const double v = std::clamp(value, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 + (8.0 - 255.0) * v));
    const int g = static_cast<int>(std::lround(255.0 + (48.0 - 255.0) * v));
    const int b = static_cast<int>(std::lround(255.0 + (107.0 - 255.0) * v));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string grouped_bar_chart(const std::vector<std::string>& group_names,
                              const std::vector<std::string>& series_names,
                              const std::vector<std::vector<std::optional<double>>>& values,
                              const std::string& title, const BarChartLayout& layout) {
    const std::size_t n_groups = group_names.size();
    const std::size_t n_series = series_names.size();
    const double group_width =
        static_cast<double>(n_series) * (layout.bar_width + layout.bar_gap) - layout.bar_gap;
    const double plot_width =
        static_cast<double>(n_groups) * (group_width + layout.group_gap) - layout.group_gap;
    const double width = layout.margin_left + plot_width + 24.0 + layout.legend_width;
    const double height = layout.margin_top + layout.plot_height + layout.margin_bottom;
    const double base_y = layout.margin_top + layout.plot_height;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"#ffffff\"/>\n";
    out += text_element(layout.margin_left + plot_width / 2.0, layout.margin_top - 26.0, title, 15,
                        "middle", "font-weight=\"bold\"");

    // y axis, gridlines every 0.2
    for (int tick = 0; tick <= 5; ++tick) {
        const double frac = static_cast<double>(tick) / 5.0;
        const double y = base_y - frac * layout.plot_height;
        out += "  <line x1=\"" + num(layout.margin_left) + "\" y1=\"" + num(y) + "\" x2=\"" +
               num(layout.margin_left + plot_width) + "\" y2=\"" + num(y) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        char label[8];
        std::snprintf(label, sizeof(label), "%.1f", frac);
        out += text_element(layout.margin_left - 8.0, y + 4.0, label, 11, "end");
    }
    out += "  <line x1=\"" + num(layout.margin_left) + "\" y1=\"" + num(layout.margin_top) +
           "\" x2=\"" + num(layout.margin_left) + "\" y2=\"" + num(base_y) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "  <line x1=\"" + num(layout.margin_left) + "\" y1=\"" + num(base_y) + "\" x2=\"" +
           num(layout.margin_left + plot_width) + "\" y2=\"" + num(base_y) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += text_element(18.0, layout.margin_top + layout.plot_height / 2.0, "Accuracy", 12,
                        "middle",
                        "transform=\"rotate(-90 18 " +
                            num(layout.margin_top + layout.plot_height / 2.0) + ")\"");

    for (std::size_t g = 0; g < n_groups; ++g) {
        const double group_x =
            layout.margin_left + static_cast<double>(g) * (group_width + layout.group_gap);
        for (std::size_t s = 0; s < n_series; ++s) {
            const double x = group_x + static_cast<double>(s) * (layout.bar_width + layout.bar_gap);
            const std::optional<double>& value = values[g][s];
            if (!value) {
                out += "  <rect class=\"bar-missing\" x=\"" + num(x) + "\" y=\"" +
                       num(base_y - 12.0) + "\" width=\"" + num(layout.bar_width) +
                       "\" height=\"12.00\" fill=\"#eeeeee\" stroke=\"#999999\" stroke-dasharray=\"2,2\"/>\n";
                continue;
            }
            const double bar_height = *value * layout.plot_height;
            const double y = base_y - bar_height;
            out += "  <rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
                   num(layout.bar_width) + "\" height=\"" + num(bar_height) + "\" fill=\"" +
                   kPalette[s % kPaletteSize] + "\"/>\n";
            const double label_x = x + layout.bar_width / 2.0 + 3.0;
            const double label_y = y - 4.0;
            out += "  <text class=\"bar-value\" x=\"" + num(label_x) + "\" y=\"" + num(label_y) +
                   "\" font-size=\"9\" font-family=\"Helvetica, Arial, sans-serif\"" +
                   " text-anchor=\"start\" transform=\"rotate(-90 " + num(label_x) + " " +
                   num(label_y) + ")\">" + format_fixed4(*value) + "</text>\n";
        }
        out += text_element(group_x + group_width / 2.0, base_y + 18.0, group_names[g], 12,
                            "middle");
    }

    // legend
    const double legend_x = layout.margin_left + plot_width + 24.0;
    for (std::size_t s = 0; s < n_series; ++s) {
        const double y = layout.margin_top + static_cast<double>(s) * 22.0;
        out += "  <rect x=\"" + num(legend_x) + "\" y=\"" + num(y) + "\" width=\"14.00\"" +
               " height=\"14.00\" fill=\"" + kPalette[s % kPaletteSize] + "\"/>\n";
        out += text_element(legend_x + 20.0, y + 11.0, series_names[s], 11, "start");
    }

    out += "</svg>\n";
    return out;
}

std::string heatmap(const std::vector<std::string>& row_names,
                    const std::vector<std::string>& col_names,
                    const std::vector<std::vector<std::optional<double>>>& values,
                    const std::string& title, const HeatmapLayout& layout) {
    const std::size_t n_rows = row_names.size();
    const std::size_t n_cols = col_names.size();
    const double grid_width = static_cast<double>(n_cols) * layout.cell_width;
    const double grid_height = static_cast<double>(n_rows) * layout.cell_height;
    const double width = layout.margin_left + grid_width + layout.margin_right;
    const double height = layout.margin_top + grid_height + layout.margin_bottom;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"#ffffff\"/>\n";
    out += text_element(layout.margin_left + grid_width / 2.0, 28.0, title, 15, "middle",
                        "font-weight=\"bold\"");

    for (std::size_t c = 0; c < n_cols; ++c) {
        const double x = layout.margin_left + (static_cast<double>(c) + 0.5) * layout.cell_width;
        const double y = layout.margin_top - 10.0;
        out += text_element(x, y, col_names[c], 11, "end",
                            "transform=\"rotate(30 " + num(x) + " " + num(y) + ")\"");
    }

    for (std::size_t r = 0; r < n_rows; ++r) {
        const double row_y = layout.margin_top + static_cast<double>(r) * layout.cell_height;
        out += text_element(layout.margin_left - 8.0, row_y + layout.cell_height / 2.0 + 4.0,
                            row_names[r], 12, "end");
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double x = layout.margin_left + static_cast<double>(c) * layout.cell_width;
            const std::optional<double>& value = values[r][c];
            const std::string fill = value ? heat_color(*value) : "#cccccc";
            out += "  <rect class=\"cell\" x=\"" + num(x) + "\" y=\"" + num(row_y) +
                   "\" width=\"" + num(layout.cell_width) + "\" height=\"" +
                   num(layout.cell_height) + "\" fill=\"" + fill +
                   "\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n";
            const std::string body = value ? format_fixed4(*value) : "failed";
            const std::string color = value && *value > 0.55 ? "#ffffff" : "#1a1a1a";
            out += "  <text class=\"cell-label\" x=\"" + num(x + layout.cell_width / 2.0) +
                   "\" y=\"" + num(row_y + layout.cell_height / 2.0 + 4.0) +
                   "\" font-size=\"11\" font-family=\"Helvetica, Arial, sans-serif\"" +
                   " text-anchor=\"middle\" fill=\"" + color + "\">" + body + "</text>\n";
        }
    }

    out += "</svg>\n";
    return out;
}

}  // namespace oneshot::svg
