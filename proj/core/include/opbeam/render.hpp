#pragma once

#include <span>
#include <string>

#include "opbeam/instance.hpp"

namespace opbeam {

struct RenderOptions {
    double size = 512.0;       ///< canvas width and height in pixels
    double margin = 24.0;
    double max_radius = 10.0;  ///< radius of a prize-1 node
};

/// SVG plot of a solution. Every node other than start and end is a circle
/// whose area is proportional to its prize; start and end are drawn as a
/// star (one star when they share a location); the path is a polyline.
/// Throws std::invalid_argument when the instance has no coordinates.
std::string render_svg(const Instance& inst, std::span<const NodeId> path,
                       const RenderOptions& options = {});

}  // namespace opbeam
