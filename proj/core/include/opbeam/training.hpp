#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opbeam/generator.hpp"
#include "opbeam/network.hpp"
#include "opbeam/random.hpp"
#include "opbeam/scoring.hpp"

namespace opbeam {

// ---------------------------------------------------------------------------
// Environment

struct StepResult {
    double reward = 0.0;
    PathState next;
    bool done = false;
};

/// Visits `v`: reward is its prize, `done` when the successor has no feasible
/// extension. Throws std::invalid_argument for an infeasible action.
StepResult env_step(const Instance& inst, const PathState& state, NodeId v);

/// One replay record. The instance is shared by every transition of an episode.
struct Transition {
    std::shared_ptr<const Instance> instance;
    PathState state;
    NodeId action = -1;
    double reward = 0.0;
    PathState next;
    bool done = false;
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

    /// `count` distinct indices drawn uniformly (without replacement).
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

/// With probability 1 - epsilon the argmax-q feasible node (ties to the
/// lowest index), otherwise a uniformly random feasible node. Throws
/// std::invalid_argument when the state has no feasible node.
NodeId epsilon_greedy(const Instance& inst, const PathState& state, const ActionValueModel& model,
                      double epsilon, Rng& rng);
NodeId epsilon_greedy(const Instance& inst, const PathState& state, std::span<const double> q_map,
                      double epsilon, Rng& rng);

/// Double Q-learning targets with discount 1: y = r for terminal transitions,
/// otherwise y = r + q_target(s', argmax_v q_online(s', v)).
std::vector<double> double_q_target(std::span<const Transition> batch, const ActionValueModel& online,
                                    const ActionValueModel& target);

/// Adam over every tensor of a QNetworkParams.
class AdamOptimizer {
public:
    AdamOptimizer(const QNetworkConfig& cfg, double learning_rate, double beta1 = 0.9,
                  double beta2 = 0.999, double epsilon = 1e-8);

    void step(QNetworkParams& params, const QNetworkParams& grad);
    long steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    QNetworkParams m_, v_;
};

/// Mean squared TD error over `batch` and its gradient, accumulated into
/// `grad` (which is overwritten). Samples run over `threads` workers and are
/// reduced in index order.
double td_loss_and_gradient(const QNetworkParams& params, const QNetworkConfig& cfg,
                            std::span<const Transition> batch, std::span<const double> targets,
                            QNetworkParams& grad, int threads = 1);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    int n = 20;
    PrizeKind kind = PrizeKind::Uniform;
    double t_max = 2.0;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::size_t replay_capacity = 10000;
    int target_sync = 100;
    int parallel_envs = 16;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::optional<int> epsilon_decay_steps;  ///< default: half of max_steps
    int max_steps = 20000;
    int validation_size = 200;
    int eval_period = 500;
    int log_period = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    QNetworkConfig network;

    void validate() const;
    int decay_steps() const;
    double epsilon_at(int step) const;
};

std::string train_config_to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const std::string& text);

struct TrainLogRecord {
    int step = 0;
    double loss = 0.0;
    double epsilon = 0.0;
    std::optional<double> validation_mean;
};

std::string to_ndjson(const TrainLogRecord& rec);

struct TrainResult {
    QNetworkParams best_params;
    double best_validation = 0.0;
    int best_step = 0;
    std::vector<TrainLogRecord> log;
};

/// Seeded validation instances used for checkpoint selection.
std::vector<Instance> validation_instances(const TrainConfig& cfg);

/// Fitted double Q-learning on freshly generated instances. Fully
/// deterministic given the config (including seed). Throws NetworkError on a
/// non-finite loss.
TrainResult train(const TrainConfig& cfg,
                  const std::function<void(const TrainLogRecord&)>& on_record = {});

// ---------------------------------------------------------------------------
// Evaluation

struct EvalResult {
    double mean = 0.0;
    std::vector<double> per_instance;
};

/// Greedy rollout of `policy` on every instance. Instances are spread over
/// `threads` workers; the policy must be safe to call concurrently.
EvalResult evaluate(const StatePolicy& policy, std::span<const Instance> instances, int threads = 1);

/// Sampled rollout of a probability policy on every instance; instance i
/// uses the stream derive_seed(seed, i).
EvalResult evaluate_sampled(const StatePolicy& policy, std::span<const Instance> instances,
                            std::uint64_t seed, int threads = 1);

}  // namespace opbeam
