#include "opbeam/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "opbeam/search.hpp"

namespace opbeam {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double tsili_node_score(NodeId v, const PathState& path, const Instance& inst) {
    const double c = inst.cost(path.last(), v);
    if (c <= 0.0) {
        return kInf;
    }
    const double ratio = inst.prize(v) / c;
    const double sq = ratio * ratio;
    return sq * sq;
}

std::vector<double> tsili_probabilities(const PathState& path, const Instance& inst,
                                        std::span<const NodeId> feasible) {
    if (feasible.empty()) {
        throw std::invalid_argument("tsili_probabilities needs at least one feasible node");
    }
    std::vector<double> scores(feasible.size());
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        scores[i] = tsili_node_score(feasible[i], path, inst);
    }
    std::vector<std::size_t> order(feasible.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(kTsiliCandidates, feasible.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    order.resize(keep);

    std::vector<double> probs(feasible.size(), 0.0);
    std::size_t infinite = 0;
    double total = 0.0;
    for (std::size_t i : order) {
        if (std::isinf(scores[i])) ++infinite;
        else total += scores[i];
    }
    for (std::size_t i : order) {
        if (infinite > 0) {
            probs[i] = std::isinf(scores[i]) ? 1.0 / static_cast<double>(infinite) : 0.0;
        } else if (total > 0.0) {
            probs[i] = scores[i] / total;
        } else {
            probs[i] = 1.0 / static_cast<double>(keep);
        }
    }
    return probs;
}

std::vector<double> tsili_probabilities(const PathState& path, const Instance& inst) {
    const auto feasible = feasible_extensions(path, inst);
    return tsili_probabilities(path, inst, feasible);
}

std::vector<double> TsiliScorePolicy::evaluate(const Instance& inst, const PathState& path,
                                               std::span<const NodeId> feasible) const {
    std::vector<double> out(feasible.size());
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        out[i] = tsili_node_score(feasible[i], path, inst);
    }
    return out;
}

std::vector<double> TsiliProbabilityPolicy::evaluate(const Instance& inst, const PathState& path,
                                                     std::span<const NodeId> feasible) const {
    return tsili_probabilities(path, inst, feasible);
}

std::vector<double> RandomPolicy::evaluate(const Instance&, const PathState&,
                                           std::span<const NodeId> feasible) const {
    return std::vector<double>(feasible.size(), 1.0 / static_cast<double>(feasible.size()));
}

double LogProbScore::score(const Instance& inst, const PathState& path) const {
    const auto nodes = path.nodes();
    // The closing hop to the end node is not a selection step.
    const std::size_t steps = path.closed() ? nodes.size() - 1 : nodes.size();
    PathState state = PathState::initial(inst);
    double total = 0.0;
    for (std::size_t i = 1; i < steps; ++i) {
        const NodeId chosen = nodes[i];
        const auto feasible = feasible_extensions(state, inst);
        const auto it = std::find(feasible.begin(), feasible.end(), chosen);
        if (it == feasible.end()) {
            return -kInf;
        }
        const auto probs = policy_.evaluate(inst, state, feasible);
        const double p = probs[static_cast<std::size_t>(it - feasible.begin())];
        if (!(p > 0.0)) {
            return -kInf;
        }
        total += std::log(p);
        state = extend(state, chosen, inst);
    }
    return total;
}

double TsiliRolloutScore::score(const Instance& inst, const PathState& path) const {
    if (path.closed()) return path.prize();
    static const TsiliScorePolicy policy;
    PathState state = path;
    for (auto feasible = feasible_extensions(state, inst); !feasible.empty();
         feasible = feasible_extensions(state, inst)) {
        const auto values = policy.evaluate(inst, state, feasible);
        const auto best = std::max_element(values.begin(), values.end());
        state = extend(state, feasible[static_cast<std::size_t>(best - values.begin())], inst);
    }
    return state.prize();
}

double estimate_subsequent_prize(std::span<const double> q_map) {
    double best = -kInf;
    for (double q : q_map) best = std::max(best, q);
    return std::isinf(best) && best < 0 ? 0.0 : best;
}

double LearnedQScore::score(const Instance& inst, const PathState& path) const {
    if (path.closed()) return path.prize();
    return path.prize() + estimate_subsequent_prize(model_.q_values(inst, path));
}

void LearnedQScore::score_batch(const Instance& inst, std::span<const PathState> paths,
                                std::span<double> out) const {
    const auto q = model_.q_values_batch(inst, paths);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        out[i] = paths[i].closed() ? paths[i].prize()
                                   : paths[i].prize() + estimate_subsequent_prize(q[i]);
    }
}

std::vector<double> QValuePolicy::evaluate(const Instance& inst, const PathState& path,
                                           std::span<const NodeId> feasible) const {
    const auto q = model_.q_values(inst, path);
    std::vector<double> out(feasible.size());
    for (std::size_t i = 0; i < feasible.size(); ++i) out[i] = q[feasible[i]];
    return out;
}

}  // namespace opbeam
