#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "opbeam/instance.hpp"
#include "opbeam/path.hpp"
#include "opbeam/scoring.hpp"

namespace opbeam {

struct SearchResult {
    PathState best_path;         ///< always closed
    std::size_t expanded = 0;    ///< partial paths whose children were generated
    double elapsed_seconds = 0.0;
};

/// Queue index of a path with the given cost: ceil(cost / tau), 0 for cost 0.
std::size_t cost_level_index(double cost, double tau);

/// Beam search whose beams are bucketed by accumulated cost into intervals of
/// width `tau`. Each bucket keeps at most `beam_size` paths ranked by `score`
/// (evicting the lowest, newest first among equal scores). The returned path
/// is the highest-prize path ever inserted, closed to the end node.
///
/// A bucket is drained in waves: the whole current content is popped, all
/// children are scored with one score_batch call, then inserted in
/// (parent, node index) order. Children that fall back into the bucket being
/// drained form the next wave.
SearchResult cost_level_beam_search(const Instance& inst, const HeuristicScore& score,
                                    std::size_t beam_size, double tau);

/// Classic beam search synchronized on path length.
SearchResult step_beam_search(const Instance& inst, const HeuristicScore& score,
                              std::size_t beam_size);

/// Follows argmax of `policy` (ties to the lowest node index) until no
/// feasible node remains, then closes the path.
SearchResult greedy_rollout(const Instance& inst, const StatePolicy& policy);

/// Samples one node per state from the distribution emitted by `policy`.
/// Throws std::invalid_argument if a distribution does not sum to 1 (1e-6)
/// or has empty support while feasible nodes exist.
SearchResult sampled_rollout(const Instance& inst, const StatePolicy& policy, std::uint64_t seed);

struct ExactOptions {
    int max_nodes = 16;  ///< enumeration guard
    bool prune = true;   ///< branch-and-bound on reachable-prize bound
};

class SizeLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Depth-first enumeration of all feasible node sequences; provably optimal.
SearchResult exhaustive_exact(const Instance& inst, const ExactOptions& options = {});

/// Optimal closed completion of an open `prefix`.
SearchResult exhaustive_exact_from(const Instance& inst, const PathState& prefix,
                                   const ExactOptions& options = {});

}  // namespace opbeam
