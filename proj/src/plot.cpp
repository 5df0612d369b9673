#include "ergsyn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ergsyn/errors.hpp"

namespace ergsyn {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<PlotSeries>& series, const std::string& x_label,
                         const std::string& y_label) {
    constexpr double W = 820, H = 480;
    constexpr double L = 70, R = 20, T = 40, B = 50;

    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -std::numeric_limits<double>::infinity();
    std::size_t x_max = 1;
    for (const auto& s : series) {
        for (double v : s.y) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
        x_max = std::max(x_max, s.y.size());
    }
    if (!std::isfinite(y_lo) || !std::isfinite(y_hi)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (y_hi == y_lo) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    auto px = [&](double x) { return L + x / static_cast<double>(x_max - 1 ? x_max - 1 : 1) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y_lo) / (y_hi - y_lo) * (H - T - B); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write figure: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << title << "</text>\n";

    // Axes with min/max ticks.
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << L - 8 << "\" y=\"" << py(y_hi - pad) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(y_hi - pad)
        << "</text>\n";
    out << "<text x=\"" << L - 8 << "\" y=\"" << py(y_lo + pad) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(y_lo + pad)
        << "</text>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << (T + H - B) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 18 " << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";

    for (const auto& s : series) {
        if (s.y.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
            << "\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << " points=\"";
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (i) out << ' ';
            out << num(px(static_cast<double>(i))) << ',' << num(py(s.y[i]));
        }
        out << "\"/>\n";
    }

    // Legend for labelled series.
    double ly = T + 8;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        out << "<line x1=\"" << W - R - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - R - 120
            << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << "/>\n";
        out << "<text x=\"" << W - R - 114 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace ergsyn
