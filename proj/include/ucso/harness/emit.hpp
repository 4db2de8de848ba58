#pragma once

#include <string>
#include <vector>

namespace ucso::harness {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Shortest round-trippable decimal form (17 significant digits).
std::string format_double(double v);

// RFC-style quoting: fields holding commas, quotes or newlines are quoted and
// embedded quotes doubled.
std::string csv_quote(const std::string& field);

void write_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

// Self-contained static SVG chart; log-scaled axes drop non-positive points.
void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<PlotSeries>& series, bool log_x,
                    bool log_y);

}  // namespace ucso::harness
