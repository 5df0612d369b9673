#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ergsyn {

struct PlotSeries {
    std::vector<double> y;
    std::string color = "#000000";
    bool dashed = false;
    double width = 1.0;
    std::string label;
};

// Fixed-size SVG line chart with auto-scaled axes. Output is deterministic
// for identical inputs.
void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<PlotSeries>& series, const std::string& x_label,
                         const std::string& y_label);

}  // namespace ergsyn
