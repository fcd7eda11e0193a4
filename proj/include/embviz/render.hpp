#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embviz/analysis.hpp"
#include "embviz/dataset.hpp"
#include "embviz/matrix.hpp"

namespace embviz::render {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    std::string hex() const;
};

/// Twelve-color palette cycled by label index.
std::vector<Rgb> default_palette();

struct PlotStyle {
    int width_px = 360;  // per panel
    int height_px = 360;
    double point_radius = 2.5;
    std::vector<Rgb> class_palette = default_palette();
    Rgb train_color{214, 39, 40}; // red; also used for incorrect scatter points
    Rgb test_color{31, 119, 180}; // blue; also used for correct scatter points
    int margin_px = 24;
};

/// Three side-by-side panels over one shared data->pixel transform:
/// train points by class color, test points by class color, and the overlay
/// colored train/test (with a two-entry legend). One circle per visible
/// point in row order; output text is deterministic.
std::string render_map_panels(const Matrix& coords, std::span<const int> labels,
                              std::span<const Split> splits, const PlotStyle& style);

/// Same-vs-different similarity scatter with the y = x diagonal drawn.
/// Axes span [-1, 1] squared, expanded if any point falls outside. x is the
/// closest-same similarity, y the closest-different; correct points use
/// test_color and incorrect ones train_color.
std::string render_scatter(std::span<const analysis::ScatterPoint> points,
                           const PlotStyle& style);

} // namespace embviz::render
