#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "opbeam/search.hpp"

namespace opbeam {

namespace {

// Prizes lie on a 1/100 grid in practice; this only absorbs summation-order noise.
constexpr double kImprovement = 1e-12;

class Enumerator {
public:
    Enumerator(const Instance& inst, const PathState& prefix, bool prune)
        : inst_(inst), prune_(prune), visited_(static_cast<std::size_t>(inst.size()), 0) {
        for (NodeId v : prefix.nodes()) {
            nodes_.push_back(v);
            visited_[v] = 1;
        }
        best_nodes_ = nodes_;
        best_prize_ = prefix.prize();
        cost_ = prefix.cost();
        prize_ = prefix.prize();
        if (prune_) compute_shortest_paths();
    }

    void run() { visit(); }

    const std::vector<NodeId>& best_nodes() const { return best_nodes_; }
    std::size_t expanded() const { return expanded_; }

private:
    bool feasible(NodeId last, NodeId v) const {
        return !visited_[v] && v != inst_.end() &&
               (cost_ + inst_.cost(last, v)) + inst_.cost(v, inst_.end()) <= inst_.t_max();
    }

    // Costs need not satisfy the triangle inequality, so the bound uses
    // shortest-path distances: a node visited later in any completion is
    // reached from `last` and leaves for the end at no less than these.
    void compute_shortest_paths() {
        const int n = inst_.size();
        dist_.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int v = 0; v < n; ++v) {
            for (int w = 0; w < n; ++w) dist_[v * n + w] = inst_.cost(v, w);
        }
        for (int k = 0; k < n; ++k) {
            for (int v = 0; v < n; ++v) {
                for (int w = 0; w < n; ++w) {
                    dist_[v * n + w] = std::min(dist_[v * n + w], dist_[v * n + k] + dist_[k * n + w]);
                }
            }
        }
    }

    bool reachable(NodeId last, NodeId v) const {
        const int n = inst_.size();
        return !visited_[v] && v != inst_.end() &&
               cost_ + dist_[last * n + v] + dist_[v * n + inst_.end()] <= inst_.t_max();
    }

    void visit() {
        ++expanded_;
        const NodeId last = nodes_.back();
        if (prune_) {
            double bound = prize_;
            for (NodeId v = 0; v < inst_.size(); ++v) {
                if (reachable(last, v)) bound += inst_.prize(v);
            }
            if (bound <= best_prize_ + kImprovement) return;
        }
        for (NodeId v = 0; v < inst_.size(); ++v) {
            if (!feasible(last, v)) continue;
            const double saved_cost = cost_;
            const double saved_prize = prize_;
            cost_ += inst_.cost(last, v);
            prize_ += inst_.prize(v);
            visited_[v] = 1;
            nodes_.push_back(v);
            if (prize_ > best_prize_ + kImprovement) {
                best_prize_ = prize_;
                best_nodes_ = nodes_;
            }
            visit();
            nodes_.pop_back();
            visited_[v] = 0;
            cost_ = saved_cost;
            prize_ = saved_prize;
        }
    }

    const Instance& inst_;
    bool prune_;
    std::vector<char> visited_;
    std::vector<NodeId> nodes_;
    std::vector<NodeId> best_nodes_;
    std::vector<double> dist_;
    double best_prize_ = 0.0;
    double cost_ = 0.0;
    double prize_ = 0.0;
    std::size_t expanded_ = 0;
};

}  // namespace

SearchResult exhaustive_exact_from(const Instance& inst, const PathState& prefix,
                                   const ExactOptions& options) {
    if (inst.size() > options.max_nodes) {
        throw SizeLimitError("exact enumeration is limited to " + std::to_string(options.max_nodes) +
                             " nodes, instance has " + std::to_string(inst.size()));
    }
    if (prefix.closed()) {
        throw PathError("prefix is already closed");
    }
    const auto t0 = std::chrono::steady_clock::now();
    Enumerator search(inst, prefix, options.prune);
    search.run();
    PathState best = path_from_nodes(search.best_nodes(), inst);
    SearchResult result{close_path(best, inst), search.expanded(), 0.0};
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

SearchResult exhaustive_exact(const Instance& inst, const ExactOptions& options) {
    return exhaustive_exact_from(inst, PathState::initial(inst), options);
}

}  // namespace opbeam
