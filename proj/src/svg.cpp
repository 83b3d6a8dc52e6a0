#include "ecmc/svg.hpp"

#include <cstdio>
#include <sstream>

namespace ecmc {

namespace {

constexpr int kSize = 480;
constexpr int kMargin = 56;
constexpr int kPlot = kSize - 2 * kMargin;
constexpr std::size_t kLegendLimit = 12;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string coord(double unit_x, double unit_y) {
    // y axis points down in SVG, up in the chart
    const double px = kMargin + unit_x * kPlot;
    const double py = kMargin + (1.0 - unit_y) * kPlot;
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.2f,%.2f", px, py);
    return buffer;
}

std::string escape(const std::string& text) {
    std::string safe;
    for (char c : text) {
        switch (c) {
            case '&': safe += "&amp;"; break;
            case '<': safe += "&lt;"; break;
            case '>': safe += "&gt;"; break;
            default: safe.push_back(c);
        }
    }
    return safe;
}

}  // namespace

std::string render_unit_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\""
        << kSize << "\" viewBox=\"0 0 " << kSize << " " << kSize << "\">\n";
    svg << "<rect width=\"" << kSize << "\" height=\"" << kSize << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";

    // frame and ticks every 0.2
    svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlot
        << "\" height=\"" << kPlot << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double unit = i / 5.0;
        const double px = kMargin + unit * kPlot;
        const double py = kMargin + (1.0 - unit) * kPlot;
        char label[8];
        std::snprintf(label, sizeof(label), "%.1f", unit);
        svg << "<line x1=\"" << px << "\" y1=\"" << kMargin + kPlot << "\" x2=\"" << px
            << "\" y2=\"" << kMargin + kPlot + 5 << "\" stroke=\"#333333\"/>\n";
        svg << "<text x=\"" << px << "\" y=\"" << kMargin + kPlot + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << label << "</text>\n";
        svg << "<line x1=\"" << kMargin - 5 << "\" y1=\"" << py << "\" x2=\"" << kMargin
            << "\" y2=\"" << py << "\" stroke=\"#333333\"/>\n";
        svg << "<text x=\"" << kMargin - 9 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
            << "</text>\n";
    }
    svg << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << kSize / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << kSize / 2 << ")\">" << escape(y_label)
        << "</text>\n";

    // chance diagonal
    svg << "<line x1=\"" << coord(0, 0).substr(0, coord(0, 0).find(',')) << "\" y1=\""
        << coord(0, 0).substr(coord(0, 0).find(',') + 1) << "\" x2=\""
        << coord(1, 1).substr(0, coord(1, 1).find(',')) << "\" y2=\""
        << coord(1, 1).substr(coord(1, 1).find(',') + 1)
        << "\" stroke=\"#aaaaaa\" stroke-dasharray=\"5,4\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].points.empty()) continue;
        svg << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteSize]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].points.size(); ++i) {
            if (i > 0) svg << ' ';
            svg << coord(series[s].points[i].first, series[s].points[i].second);
        }
        svg << "\"/>\n";
    }

    if (series.size() <= kLegendLimit && series.size() > 1) {
        const int x0 = kMargin + 12;
        int y = kMargin + 16;
        for (std::size_t s = 0; s < series.size(); ++s) {
            svg << "<line x1=\"" << x0 << "\" y1=\"" << y - 4 << "\" x2=\"" << x0 + 22
                << "\" y2=\"" << y - 4 << "\" stroke=\"" << kPalette[s % kPaletteSize]
                << "\" stroke-width=\"1.5\"/>\n";
            svg << "<text x=\"" << x0 + 28 << "\" y=\"" << y
                << "\" font-family=\"sans-serif\" font-size=\"11\">"
                << escape(series[s].label) << "</text>\n";
            y += 16;
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ecmc
