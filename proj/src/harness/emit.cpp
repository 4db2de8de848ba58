#include "ucso/harness/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ucso::harness {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i)
            out << (i ? "," : "") << csv_quote(fields[i]);
        out << "\n";
    };
    line(table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::runtime_error("write_csv: ragged row in " + path);
        line(row);
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n') {
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            field.clear();
            record.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
            any = true;
        }
    }
    if (quoted) throw std::runtime_error("read_csv: unterminated quote in " + path);
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty()) throw std::runtime_error("read_csv: empty file " + path);

    CsvTable table;
    table.header = std::move(records.front());
    table.rows.assign(records.begin() + 1, records.end());
    return table;
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<PlotSeries>& series, bool log_x,
                    bool log_y) {
    const double width = 640, height = 480;
    const double left = 70, right = 20, top = 40, bottom = 50;

    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };

    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    bool has_points = false;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if ((log_x && s.x[i] <= 0) || (log_y && s.y[i] <= 0)) continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_min = std::min(x_min, tx(s.x[i]));
            x_max = std::max(x_max, tx(s.x[i]));
            y_min = std::min(y_min, ty(s.y[i]));
            y_max = std::max(y_max, ty(s.y[i]));
            has_points = true;
        }
    if (!has_points) {
        x_min = y_min = 0;
        x_max = y_max = 1;
    }
    if (x_max - x_min < 1e-12) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max - y_min < 1e-12) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double x_pad = 0.04 * (x_max - x_min), y_pad = 0.06 * (y_max - y_min);
    x_min -= x_pad;
    x_max += x_pad;
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double v) {
        return left + (tx(v) - x_min) / (x_max - x_min) * (width - left - right);
    };
    auto py = [&](double v) {
        return height - bottom - (ty(v) - y_min) / (y_max - y_min) * (height - top - bottom);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"15\">" << escape_xml(title) << "</text>\n";

    // frame
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right
        << "\" height=\"" << height - top - bottom
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    auto axis_ticks = [&](double lo, double hi, bool log_axis) {
        std::vector<double> ticks;
        if (log_axis) {
            for (int e = int(std::ceil(lo)); e <= int(std::floor(hi)); ++e)
                ticks.push_back(std::pow(10.0, e));
            if (ticks.empty())
                ticks = {std::pow(10.0, lo + (hi - lo) * 0.25), std::pow(10.0, lo + (hi - lo) * 0.75)};
        } else {
            const double span = hi - lo;
            const double step = std::pow(10.0, std::floor(std::log10(span / 4.0)));
            double mult = span / step > 8 ? 2.0 : 1.0;
            for (double v = std::ceil(lo / (step * mult)) * step * mult; v <= hi;
                 v += step * mult)
                ticks.push_back(v);
        }
        return ticks;
    };
    auto tick_label = [&](double v, bool log_axis) {
        char buf[32];
        if (log_axis)
            std::snprintf(buf, sizeof(buf), "1e%d", int(std::lround(std::log10(v))));
        else
            std::snprintf(buf, sizeof(buf), "%g", v);
        return std::string(buf);
    };

    for (double v : axis_ticks(x_min, x_max, log_x)) {
        const double x = log_x ? px(v) : left + (v - x_min) / (x_max - x_min) * (width - left - right);
        svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << height - bottom << "\" x2=\"" << fmt2(x)
            << "\" y2=\"" << height - bottom + 5 << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << top << "\" x2=\"" << fmt2(x) << "\" y2=\""
            << height - bottom << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
        svg << "<text x=\"" << fmt2(x) << "\" y=\"" << height - bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(v, log_x) << "</text>\n";
    }
    for (double v : axis_ticks(y_min, y_max, log_y)) {
        const double y =
            log_y ? py(v) : height - bottom - (v - y_min) / (y_max - y_min) * (height - top - bottom);
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt2(y) << "\" x2=\"" << left
            << "\" y2=\"" << fmt2(y) << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << left << "\" y1=\"" << fmt2(y) << "\" x2=\"" << width - right
            << "\" y2=\"" << fmt2(y) << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt2(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(v, log_y) << "</text>\n";
    }
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape_xml(xlabel) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << (top + height - bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (top + height - bottom) / 2 << ")\">" << escape_xml(ylabel) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::ostringstream pts;
        for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
            const double xv = series[s].x[i], yv = series[s].y[i];
            if ((log_x && xv <= 0) || (log_y && yv <= 0)) continue;
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            pts << fmt2(px(xv)) << "," << fmt2(py(yv)) << " ";
        }
        svg << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
            const double xv = series[s].x[i], yv = series[s].y[i];
            if ((log_x && xv <= 0) || (log_y && yv <= 0)) continue;
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            svg << "<circle cx=\"" << fmt2(px(xv)) << "\" cy=\"" << fmt2(py(yv))
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        const double ly = top + 16 + 16 * double(s);
        svg << "<line x1=\"" << width - right - 130 << "\" y1=\"" << fmt2(ly - 4) << "\" x2=\""
            << width - right - 110 << "\" y2=\"" << fmt2(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << width - right - 105 << "\" y=\"" << fmt2(ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(series[s].label)
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_svg_plot: cannot open " + path);
    out << svg.str();
}

}  // namespace ucso::harness
