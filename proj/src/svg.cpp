#include "dynalay/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dynalay/error.hpp"

namespace dynalay {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError(path.string() + ": cannot open");
    Table t;
    std::string line;
    if (!std::getline(is, line) || line.empty()) throw FormatError(path.string() + ":1: missing header");
    t.header = split(line);
    for (std::size_t n = 2; std::getline(is, line); ++n) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw FormatError(path.string() + ":" + std::to_string(n) + ": expected " +
                              std::to_string(t.header.size()) + " columns");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

double number(const std::filesystem::path& path, std::size_t row, const std::string& cell) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw FormatError(path.string() + ":" + std::to_string(row + 2) + ": bad number '" + cell + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void axes(std::ostream& os, double y_min, double y_max, const std::string& x_label, const std::string& y_label) {
    const double x0 = kLeft, y0 = kHeight - kBottom;
    os << "<line class=\"axis\" x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(kWidth - kRight)
       << "\" y2=\"" << fmt(y0) << "\" stroke=\"black\"/>\n";
    os << "<line class=\"axis\" x1=\"" << fmt(x0) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(x0) << "\" y2=\""
       << fmt(y0) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(kTop + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << fmt(y_max) << "</text>\n";
    os << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(y0 + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << fmt(y_min) << "</text>\n";
    os << "<text x=\"" << fmt((x0 + kWidth - kRight) / 2) << "\" y=\"" << fmt(kHeight - 10)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt((kTop + y0) / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << fmt((kTop + y0) / 2) << ")\">" << escape(y_label) << "</text>\n";
}

void histogram(std::ostream& os, const Table& t, const std::filesystem::path& path) {
    if (t.header.size() != 2) throw FormatError(path.string() + ":1: histogram needs columns label,value");
    std::vector<double> values;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        values.push_back(number(path, r, t.rows[r][1]));
        if (values.back() < 0) throw FormatError(path.string() + ":" + std::to_string(r + 2) + ": negative bar");
    }
    double y_max = 0;
    for (double v : values) y_max = std::max(y_max, v);
    if (y_max == 0) y_max = 1;
    axes(os, 0.0, y_max, t.header[0], t.header[1]);

    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    const double slot = values.empty() ? plot_w : plot_w / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double h = plot_h * values[i] / y_max;
        const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
        os << "<rect class=\"bar\" x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + plot_h - h) << "\" width=\""
           << fmt(slot * 0.7) << "\" height=\"" << fmt(h) << "\" fill=\"" << kPalette[0] << "\"/>\n";
        os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << fmt(kHeight - kBottom + 16)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(t.rows[i][0]) << "</text>\n";
    }
}

void curve(std::ostream& os, const Table& t, const std::filesystem::path& path) {
    if (t.header.size() < 2) throw FormatError(path.string() + ":1: curve needs columns x,y1[,...]");
    const std::size_t series = t.header.size() - 1;
    std::vector<std::vector<double>> cols(t.header.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c) cols[c].push_back(number(path, r, t.rows[r][c]));

    // The y range always includes 0 so the bottom label stays truthful.
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    if (!t.rows.empty()) {
        x_min = *std::min_element(cols[0].begin(), cols[0].end());
        x_max = *std::max_element(cols[0].begin(), cols[0].end());
        y_max = 0;
        for (std::size_t c = 1; c < cols.size(); ++c)
            for (double v : cols[c]) {
                y_max = std::max(y_max, v);
                y_min = std::min(y_min, v);
            }
        if (y_max == y_min) y_max = y_min + 1;
        if (x_max == x_min) x_max = x_min + 1;
    }
    axes(os, y_min, y_max, t.header[0], series == 1 ? t.header[1] : "value");

    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    for (std::size_t s = 0; s < series && !t.rows.empty(); ++s) {
        const char* color = kPalette[s % std::size(kPalette)];
        os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const double x = kLeft + plot_w * (cols[0][r] - x_min) / (x_max - x_min);
            const double y = kTop + plot_h * (y_max - cols[s + 1][r]) / (y_max - y_min);
            os << (r ? " " : "") << fmt(x) << ',' << fmt(y);
        }
        os << "\"/>\n";
        os << "<text x=\"" << fmt(kWidth - kRight) << "\" y=\"" << fmt(kTop + 14.0 * static_cast<double>(s))
           << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << escape(t.header[s + 1])
           << "</text>\n";
    }
}

} // namespace

void export_svg_plot(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& svg_path) {
    const Table t = read_table(csv_path);
    std::ostringstream body;
    if (kind == PlotKind::Histogram)
        histogram(body, t, csv_path);
    else
        curve(body, t, csv_path);

    std::ofstream os(svg_path, std::ios::binary);
    if (!os) throw InputError("cannot open " + svg_path.string() + " for writing");
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
       << body.str() << "</svg>\n";
}

} // namespace dynalay
