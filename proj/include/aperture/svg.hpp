#pragma once

#include <optional>
#include <string>

#include "aperture/representation.hpp"

namespace aperture {

enum class ChartKind { Dotplot, Histogram, Heatmap, ContourBand, Scatter };

const char* chart_kind_name(ChartKind k);
ChartKind chart_kind_from_name(const std::string& name); // throws ParseError

struct SvgStyle {
    int width = 640;
    int height = 400;
    int margin = 48;
    double dot_radius = 3.0;
    double point_radius = 2.5;
    std::string color = "#4477aa";
    // Explicit data columns for dotplot/scatter; first numeric columns
    // otherwise.
    std::string x_column;
    std::string y_column;
};

// The chart a representation naturally supports: dotplot or scatter for
// samples, histogram/heatmap/contour-band for summaries, none for models
// (models disclose through serialized grids, not through these charts).
std::optional<ChartKind> default_chart_kind(const Representation& rep);

// Renders one representation. Marks are one element per datum, group or
// region cell; dots stack instead of jittering, so identical inputs give
// identical bytes. Incompatible pairings throw ValidationError naming the
// compatible kinds.
std::string render_svg(const Representation& rep, ChartKind kind, const SvgStyle& style = {});

// Renders a layer bundle into one document with shared scales. Every
// member must carry positional x/y marks (scatter, heatmap or
// contour-band); one-dimensional charts cannot share a frame.
std::string render_svg(const LayerBundle& bundle, const SvgStyle& style = {});

} // namespace aperture
