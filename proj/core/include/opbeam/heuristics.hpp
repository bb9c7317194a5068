#pragma once

#include <limits>
#include <span>
#include <vector>

#include "opbeam/scoring.hpp"

namespace opbeam {

/// f(P) = prize(P).
class PrizeOnlyScore final : public HeuristicScore {
public:
    double score(const Instance&, const PathState& path) const override { return path.prize(); }
};

/// Tsiligirides-style desirability (R_v / C_{last,v})^4. A zero travel cost
/// yields +infinity, ranked above every finite score.
double tsili_node_score(NodeId v, const PathState& path, const Instance& inst);

/// Distribution over `feasible` (aligned with it): the min(4, |feasible|)
/// nodes with the highest Tsili score share probability in proportion to
/// their scores; all others get 0. All-zero scores give a uniform split over
/// that set; infinite scores share the mass uniformly among themselves.
std::vector<double> tsili_probabilities(const PathState& path, const Instance& inst,
                                        std::span<const NodeId> feasible);
std::vector<double> tsili_probabilities(const PathState& path, const Instance& inst);

inline constexpr std::size_t kTsiliCandidates = 4;

/// Raw Tsili scores; greedy rollout over this picks the unrestricted argmax.
class TsiliScorePolicy final : public StatePolicy {
public:
    std::vector<double> evaluate(const Instance& inst, const PathState& path,
                                 std::span<const NodeId> feasible) const override;
};

/// tsili_probabilities as a policy, for sampling and log-likelihood scoring.
class TsiliProbabilityPolicy final : public StatePolicy {
public:
    std::vector<double> evaluate(const Instance& inst, const PathState& path,
                                 std::span<const NodeId> feasible) const override;
};

/// Uniform distribution over the feasible nodes. Randomness comes from the
/// seed handed to sampled_rollout.
class RandomPolicy final : public StatePolicy {
public:
    std::vector<double> evaluate(const Instance& inst, const PathState& path,
                                 std::span<const NodeId> feasible) const override;
};

/// f(P) = sum over the path's selection steps of log p(v_i | s_i).
/// A zero-probability step gives -infinity.
class LogProbScore final : public HeuristicScore {
public:
    explicit LogProbScore(const StatePolicy& policy) : policy_(policy) {}
    double score(const Instance& inst, const PathState& path) const override;

private:
    const StatePolicy& policy_;
};

/// f(P) = prize(P) + prize still collected by a greedy Tsili rollout from P.
class TsiliRolloutScore final : public HeuristicScore {
public:
    double score(const Instance& inst, const PathState& path) const override;
};

/// e(s) = max over feasible actions of q(s, v), or 0 when none remains.
double estimate_subsequent_prize(std::span<const double> q_map);

/// f(P) = prize(P) + e(s') with e taken from an action-value model over the
/// subproblem rooted at last(P).
class LearnedQScore final : public HeuristicScore {
public:
    explicit LearnedQScore(const ActionValueModel& model) : model_(model) {}
    double score(const Instance& inst, const PathState& path) const override;
    void score_batch(const Instance& inst, std::span<const PathState> paths,
                     std::span<double> out) const override;

private:
    const ActionValueModel& model_;
};

/// Exposes an action-value model as a per-state node scorer (q restricted to
/// the feasible nodes).
class QValuePolicy final : public StatePolicy {
public:
    explicit QValuePolicy(const ActionValueModel& model) : model_(model) {}
    std::vector<double> evaluate(const Instance& inst, const PathState& path,
                                 std::span<const NodeId> feasible) const override;

private:
    const ActionValueModel& model_;
};

}  // namespace opbeam
