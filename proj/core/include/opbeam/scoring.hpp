#pragma once

#include <span>
#include <vector>

#include "opbeam/instance.hpp"
#include "opbeam/path.hpp"

namespace opbeam {

/// f(P, s): ranks partial paths, higher is better. Implementations must be
/// pure and safe to call concurrently.
class HeuristicScore {
public:
    virtual ~HeuristicScore() = default;

    virtual double score(const Instance& inst, const PathState& path) const = 0;

    /// Scores a batch; `out` has one slot per path. Override when a batch can
    /// be evaluated faster than one path at a time.
    virtual void score_batch(const Instance& inst, std::span<const PathState> paths,
                             std::span<double> out) const {
        for (std::size_t i = 0; i < paths.size(); ++i) {
            out[i] = score(inst, paths[i]);
        }
    }
};

/// Per-state node scorer. Returns one value per entry of `feasible`, in the
/// same order. Probability policies return a distribution over `feasible`.
class StatePolicy {
public:
    virtual ~StatePolicy() = default;

    virtual std::vector<double> evaluate(const Instance& inst, const PathState& path,
                                         std::span<const NodeId> feasible) const = 0;
};

/// Action values q(s, v) for every node of the instance; entries that are
/// not feasible actions hold -infinity.
class ActionValueModel {
public:
    virtual ~ActionValueModel() = default;

    virtual std::vector<double> q_values(const Instance& inst, const PathState& path) const = 0;

    virtual std::vector<std::vector<double>> q_values_batch(const Instance& inst,
                                                            std::span<const PathState> paths) const {
        std::vector<std::vector<double>> out;
        out.reserve(paths.size());
        for (const auto& p : paths) out.push_back(q_values(inst, p));
        return out;
    }
};

}  // namespace opbeam
