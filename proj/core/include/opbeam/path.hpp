#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "opbeam/instance.hpp"

namespace opbeam {

class PathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A partial (or closed) path starting at the instance's start node, with
/// cached cost and prize. Value type: every operation returns a new state.
class PathState {
public:
    /// The path holding only the start node.
    static PathState initial(const Instance& inst);

    std::span<const NodeId> nodes() const { return nodes_; }
    std::size_t length() const { return nodes_.size(); }
    NodeId last() const { return nodes_.back(); }
    bool visited(NodeId v) const { return visited_[v] != 0; }
    double cost() const { return cost_; }
    double prize() const { return prize_; }
    bool closed() const { return closed_; }

    /// Budget left for the subproblem rooted at last().
    double remaining_budget(const Instance& inst) const { return inst.t_max() - cost_; }

    bool operator==(const PathState&) const = default;

private:
    friend PathState extend(const PathState&, NodeId, const Instance&);
    friend PathState close_path(const PathState&, const Instance&);

    std::vector<NodeId> nodes_;
    std::vector<char> visited_;
    double cost_ = 0.0;
    double prize_ = 0.0;
    bool closed_ = false;
};

/// Appends `v`; throws PathError if `v` is visited or the path is closed.
/// Budget is not checked here (see feasible_extensions).
PathState extend(const PathState& path, NodeId v, const Instance& inst);

/// Unvisited nodes other than the end node that can be appended while the
/// end node stays reachable within budget (inclusive), in ascending order.
std::vector<NodeId> feasible_extensions(const PathState& path, const Instance& inst);

/// True if appending `v` keeps the path closable within budget.
bool can_extend(const PathState& path, NodeId v, const Instance& inst);

/// Appends the end node; throws PathError if that would exceed the budget.
PathState close_path(const PathState& path, const Instance& inst);

/// Rebuilds a path from an explicit node list (first node must be the start).
/// A trailing end node closes the path.
PathState path_from_nodes(std::span<const NodeId> nodes, const Instance& inst);

double recompute_cost(std::span<const NodeId> nodes, const Instance& inst);
double recompute_prize(std::span<const NodeId> nodes, const Instance& inst);

}  // namespace opbeam
