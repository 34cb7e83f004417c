#pragma once

#include <filesystem>

namespace dynalay {

enum class PlotKind {
    Histogram,  ///< CSV "label,value": one bar per row
    Curve,      ///< CSV "x,y1,...,yk": one polyline per y column
};

/// Renders a CSV written by this library as a self-contained SVG. Identical
/// input gives identical bytes. Throws FormatError on a malformed CSV.
void export_svg_plot(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& svg_path);

} // namespace dynalay
