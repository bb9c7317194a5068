#include "opbeam/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace opbeam {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string star(double cx, double cy, double r) {
    std::string pts;
    for (int i = 0; i < 10; ++i) {
        const double rad = (i % 2 == 0) ? r : r * 0.45;
        const double a = -std::numbers::pi / 2 + i * std::numbers::pi / 5;
        if (!pts.empty()) pts += ' ';
        pts += num(cx + rad * std::cos(a)) + "," + num(cy + rad * std::sin(a));
    }
    return "  <polygon class=\"star\" points=\"" + pts + "\" fill=\"#d62728\"/>\n";
}

}  // namespace

std::string render_svg(const Instance& inst, std::span<const NodeId> path, const RenderOptions& options) {
    if (!inst.coords()) throw std::invalid_argument("instance has no coordinates to plot");
    const auto& pts = *inst.coords();
    for (NodeId v : path) {
        if (v < 0 || v >= inst.size()) throw std::invalid_argument("path node out of range");
    }

    double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
    const double scale = (options.size - 2 * options.margin) / span;
    auto sx = [&](double x) { return options.margin + (x - min_x) * scale; };
    auto sy = [&](double y) { return options.size - options.margin - (y - min_y) * scale; };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(options.size) +
                      "\" height=\"" + num(options.size) + "\" viewBox=\"0 0 " + num(options.size) + " " +
                      num(options.size) + "\">\n";
    out += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (path.size() >= 2) {
        std::string line;
        for (NodeId v : path) {
            if (!line.empty()) line += ' ';
            line += num(sx(pts[v].x)) + "," + num(sy(pts[v].y));
        }
        out += "  <polyline class=\"path\" points=\"" + line +
               "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    }

    for (NodeId v = 0; v < inst.size(); ++v) {
        if (v == inst.start() || v == inst.end()) continue;
        const double r = options.max_radius * std::sqrt(inst.prize(v));
        out += "  <circle class=\"node\" cx=\"" + num(sx(pts[v].x)) + "\" cy=\"" + num(sy(pts[v].y)) +
               "\" r=\"" + num(r) + "\" fill=\"#7f7f7f\" fill-opacity=\"0.7\"/>\n";
    }

    const Point s = pts[inst.start()];
    const Point e = pts[inst.end()];
    out += star(sx(s.x), sy(s.y), options.max_radius * 1.4);
    if (inst.end() != inst.start() && (e.x != s.x || e.y != s.y)) {
        out += star(sx(e.x), sy(e.y), options.max_radius * 1.4);
    }
    out += "</svg>\n";
    return out;
}

}  // namespace opbeam
