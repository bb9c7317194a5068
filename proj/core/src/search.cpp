#include "opbeam/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "opbeam/random.hpp"

namespace opbeam {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// NaN would break strict weak ordering; rank it with -inf.
double sanitize(double s) {
    return std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
}

struct Entry {
    double score;
    std::uint64_t seq;
    PathState path;
};

// Best first: higher score, then earlier insertion.
struct EntryOrder {
    bool operator()(const Entry& a, const Entry& b) const {
        if (a.score != b.score) return a.score > b.score;
        return a.seq < b.seq;
    }
};

using Bucket = std::set<Entry, EntryOrder>;

std::vector<PathState> children_of(std::span<const PathState> parents, const Instance& inst) {
    std::vector<PathState> out;
    for (const auto& parent : parents) {
        for (NodeId v : feasible_extensions(parent, inst)) {
            out.push_back(extend(parent, v, inst));
        }
    }
    return out;
}

std::size_t argmax_first(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

}  // namespace

std::size_t cost_level_index(double cost, double tau) {
    if (cost <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(cost / tau));
}

SearchResult cost_level_beam_search(const Instance& inst, const HeuristicScore& score,
                                    std::size_t beam_size, double tau) {
    if (beam_size < 1) {
        throw std::invalid_argument("beam size must be at least 1");
    }
    if (!(tau > 0.0) || (inst.t_max() > 0.0 && tau > inst.t_max())) {
        throw std::invalid_argument("tau must satisfy 0 < tau <= t_max");
    }
    const auto t0 = Clock::now();
    const std::size_t last_level = cost_level_index(inst.t_max(), tau);
    std::vector<Bucket> queues(last_level + 1);

    std::uint64_t seq = 0;
    PathState root = PathState::initial(inst);
    PathState best = root;
    queues[0].insert(Entry{sanitize(score.score(inst, root)), seq++, root});

    SearchResult result{root, 0, 0.0};
    std::vector<PathState> wave;
    std::vector<double> scores;
    for (std::size_t t = 0; t <= last_level; ++t) {
        while (!queues[t].empty()) {
            wave.clear();
            while (!queues[t].empty()) {
                wave.push_back(std::move(queues[t].extract(queues[t].begin()).value().path));
            }
            result.expanded += wave.size();

            std::vector<PathState> children = children_of(wave, inst);
            scores.assign(children.size(), 0.0);
            score.score_batch(inst, children, scores);

            for (std::size_t i = 0; i < children.size(); ++i) {
                PathState& child = children[i];
                if (child.prize() > best.prize()) {
                    best = child;
                }
                const std::size_t level = std::min(cost_level_index(child.cost(), tau), last_level);
                Bucket& pq = queues[level];
                pq.insert(Entry{sanitize(scores[i]), seq++, std::move(child)});
                if (pq.size() > beam_size) {
                    pq.erase(std::prev(pq.end()));
                }
            }
        }
    }
    result.best_path = close_path(best, inst);
    result.elapsed_seconds = seconds_since(t0);
    return result;
}

SearchResult step_beam_search(const Instance& inst, const HeuristicScore& score,
                              std::size_t beam_size) {
    if (beam_size < 1) {
        throw std::invalid_argument("beam size must be at least 1");
    }
    const auto t0 = Clock::now();
    std::vector<PathState> beam{PathState::initial(inst)};
    PathState best = beam.front();
    SearchResult result{best, 0, 0.0};

    std::vector<double> scores;
    std::vector<std::size_t> order;
    while (!beam.empty()) {
        result.expanded += beam.size();
        std::vector<PathState> children = children_of(beam, inst);
        if (children.empty()) break;

        scores.assign(children.size(), 0.0);
        score.score_batch(inst, children, scores);
        for (auto& s : scores) s = sanitize(s);
        for (const auto& child : children) {
            if (child.prize() > best.prize()) best = child;
        }

        order.resize(children.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t keep = std::min(beam_size, children.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (scores[a] != scores[b]) return scores[a] > scores[b];
                              return a < b;
                          });
        std::vector<PathState> next;
        next.reserve(keep);
        for (std::size_t i = 0; i < keep; ++i) {
            next.push_back(std::move(children[order[i]]));
        }
        beam = std::move(next);
    }
    result.best_path = close_path(best, inst);
    result.elapsed_seconds = seconds_since(t0);
    return result;
}

SearchResult greedy_rollout(const Instance& inst, const StatePolicy& policy) {
    const auto t0 = Clock::now();
    PathState path = PathState::initial(inst);
    std::size_t steps = 0;
    for (auto feasible = feasible_extensions(path, inst); !feasible.empty();
         feasible = feasible_extensions(path, inst)) {
        const auto values = policy.evaluate(inst, path, feasible);
        if (values.size() != feasible.size()) {
            throw std::logic_error("policy returned a vector of the wrong length");
        }
        path = extend(path, feasible[argmax_first(values)], inst);
        ++steps;
    }
    return SearchResult{close_path(path, inst), steps, seconds_since(t0)};
}

SearchResult sampled_rollout(const Instance& inst, const StatePolicy& policy, std::uint64_t seed) {
    const auto t0 = Clock::now();
    Rng rng(seed);
    PathState path = PathState::initial(inst);
    std::size_t steps = 0;
    for (auto feasible = feasible_extensions(path, inst); !feasible.empty();
         feasible = feasible_extensions(path, inst)) {
        const auto probs = policy.evaluate(inst, path, feasible);
        if (probs.size() != feasible.size()) {
            throw std::logic_error("policy returned a vector of the wrong length");
        }
        double total = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN probability");
            total += p;
        }
        if (total == 0.0) {
            throw std::invalid_argument("distribution has empty support while feasible nodes exist");
        }
        if (std::abs(total - 1.0) > 1e-6) {
            throw std::invalid_argument("distribution does not sum to 1");
        }
        const double u = uniform01(rng) * total;
        std::size_t pick = probs.size();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (probs[i] > 0.0) {
                pick = i;
                if (u < acc) break;
            }
        }
        path = extend(path, feasible[pick], inst);
        ++steps;
    }
    return SearchResult{close_path(path, inst), steps, seconds_since(t0)};
}

}  // namespace opbeam
