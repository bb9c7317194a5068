#include "opbeam/path.hpp"

#include <string>

namespace opbeam {

PathState PathState::initial(const Instance& inst) {
    PathState p;
    p.nodes_.push_back(inst.start());
    p.visited_.assign(static_cast<std::size_t>(inst.size()), 0);
    p.visited_[inst.start()] = 1;
    return p;
}

PathState extend(const PathState& path, NodeId v, const Instance& inst) {
    if (path.closed_) {
        throw PathError("path already closed");
    }
    if (v < 0 || v >= inst.size()) {
        throw PathError("node " + std::to_string(v) + " out of range");
    }
    if (path.visited(v)) {
        throw PathError("node " + std::to_string(v) + " already visited");
    }
    if (v == inst.end()) {
        throw PathError("the end node is appended by close_path, not extend");
    }
    PathState next = path;
    next.cost_ += inst.cost(path.last(), v);
    next.prize_ += inst.prize(v);
    next.nodes_.push_back(v);
    next.visited_[v] = 1;
    return next;
}

bool can_extend(const PathState& path, NodeId v, const Instance& inst) {
    if (path.closed() || path.visited(v) || v == inst.end()) {
        return false;
    }
    // Same association as extend() followed by close_path().
    return (path.cost() + inst.cost(path.last(), v)) + inst.cost(v, inst.end()) <= inst.t_max();
}

std::vector<NodeId> feasible_extensions(const PathState& path, const Instance& inst) {
    std::vector<NodeId> out;
    if (path.closed()) {
        return out;
    }
    for (NodeId v = 0; v < inst.size(); ++v) {
        if (can_extend(path, v, inst)) {
            out.push_back(v);
        }
    }
    return out;
}

PathState close_path(const PathState& path, const Instance& inst) {
    if (path.closed_) {
        throw PathError("path already closed");
    }
    const double total = path.cost_ + inst.cost(path.last(), inst.end());
    if (total > inst.t_max()) {
        throw PathError("closing the path costs " + std::to_string(total) + " > t_max " +
                        std::to_string(inst.t_max()));
    }
    PathState next = path;
    next.cost_ = total;
    next.nodes_.push_back(inst.end());
    next.visited_[inst.end()] = 1;
    next.closed_ = true;
    return next;
}

PathState path_from_nodes(std::span<const NodeId> nodes, const Instance& inst) {
    if (nodes.empty() || nodes.front() != inst.start()) {
        throw PathError("path must begin at the start node");
    }
    PathState p = PathState::initial(inst);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (i + 1 == nodes.size() && nodes[i] == inst.end()) {
            return close_path(p, inst);
        }
        p = extend(p, nodes[i], inst);
    }
    return p;
}

double recompute_cost(std::span<const NodeId> nodes, const Instance& inst) {
    double total = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        total += inst.cost(nodes[i - 1], nodes[i]);
    }
    return total;
}

double recompute_prize(std::span<const NodeId> nodes, const Instance& inst) {
    double total = 0.0;
    for (NodeId v : nodes) {
        total += inst.prize(v);
    }
    return total;
}

}  // namespace opbeam
