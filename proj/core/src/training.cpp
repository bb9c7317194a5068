#include "opbeam/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "config_json.hpp"
#include "json.hpp"
#include "opbeam/heuristics.hpp"
#include "opbeam/instance_io.hpp"
#include "opbeam/parallel.hpp"
#include "opbeam/search.hpp"

namespace opbeam {

using nlohmann::json;

StepResult env_step(const Instance& inst, const PathState& state, NodeId v) {
    if (state.closed() || v < 0 || v >= inst.size() || v == inst.end() || !can_extend(state, v, inst)) {
        throw std::invalid_argument("infeasible action " + std::to_string(v));
    }
    StepResult out;
    out.reward = inst.prize(v);
    out.next = extend(state, v, inst);
    out.done = feasible_extensions(out.next, inst).empty();
    return out;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayMemory::push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t count, Rng& rng) const {
    if (count > items_.size()) {
        throw std::invalid_argument("cannot sample more transitions than stored");
    }
    // Partial Fisher-Yates over the index range.
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + uniform_index(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

namespace {

NodeId argmax_node(std::span<const double> q_map, std::span<const NodeId> feasible) {
    NodeId best = feasible.front();
    for (NodeId v : feasible) {
        if (q_map[v] > q_map[best]) best = v;
    }
    return best;
}

}  // namespace

NodeId epsilon_greedy(const Instance& inst, const PathState& state, std::span<const double> q_map,
                      double epsilon, Rng& rng) {
    const auto feasible = feasible_extensions(state, inst);
    if (feasible.empty()) throw std::invalid_argument("epsilon_greedy on a terminal state");
    if (uniform01(rng) < epsilon) {
        return feasible[uniform_index(rng, feasible.size())];
    }
    return argmax_node(q_map, feasible);
}

NodeId epsilon_greedy(const Instance& inst, const PathState& state, const ActionValueModel& model,
                      double epsilon, Rng& rng) {
    return epsilon_greedy(inst, state, model.q_values(inst, state), epsilon, rng);
}

std::vector<double> double_q_target(std::span<const Transition> batch, const ActionValueModel& online,
                                    const ActionValueModel& target) {
    if (batch.empty()) throw std::invalid_argument("double_q_target on an empty batch");
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = batch[i];
        y[i] = t.reward;
        if (t.done) continue;
        const auto feasible = feasible_extensions(t.next, *t.instance);
        if (feasible.empty()) continue;
        const NodeId a = argmax_node(online.q_values(*t.instance, t.next), feasible);
        y[i] += target.q_values(*t.instance, t.next)[a];
    }
    return y;
}

AdamOptimizer::AdamOptimizer(const QNetworkConfig& cfg, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(QNetworkParams::zeros(cfg)),
      v_(QNetworkParams::zeros(cfg)) {}

void AdamOptimizer::step(QNetworkParams& params, const QNetworkParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::vector<Matrix*> p, m, v;
    std::vector<const Matrix*> g;
    params.for_each([&](const std::string&, Matrix& t) { p.push_back(&t); });
    m_.for_each([&](const std::string&, Matrix& t) { m.push_back(&t); });
    v_.for_each([&](const std::string&, Matrix& t) { v.push_back(&t); });
    grad.for_each([&](const std::string&, const Matrix& t) { g.push_back(&t); });
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto gi = g[i]->array();
        m[i]->array() = beta1_ * m[i]->array() + (1.0 - beta1_) * gi;
        v[i]->array() = beta2_ * v[i]->array() + (1.0 - beta2_) * gi.square();
        p[i]->array() -= lr_ * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + eps_);
    }
}

double td_loss_and_gradient(const QNetworkParams& params, const QNetworkConfig& cfg,
                            std::span<const Transition> batch, std::span<const double> targets,
                            QNetworkParams& grad, int threads) {
    const std::size_t count = batch.size();
    if (count == 0 || targets.size() != count) {
        throw std::invalid_argument("td_loss_and_gradient: batch and targets differ in size");
    }
    // Each sample gets its own gradient buffer; buffers are reduced in index
    // order so the sum does not depend on the worker count.
    std::vector<QNetworkParams> sample_grad(count);
    std::vector<double> sq_err(count);
    parallel_for(count, threads, [&](std::size_t i) {
        const Transition& t = batch[i];
        const StateEncoding enc = encode_state(*t.instance, t.state);
        const auto it = std::find(enc.node_ids.begin(), enc.node_ids.end(), t.action);
        if (it == enc.node_ids.end()) throw std::invalid_argument("action is not part of its state");
        const auto row = static_cast<Eigen::Index>(it - enc.node_ids.begin());
        Differentiator diff(params, cfg);
        const Vector& q = diff.forward(enc);
        const double err = q(row) - targets[i];
        sq_err[i] = err * err;
        Vector dq = Vector::Zero(q.size());
        dq(row) = 2.0 * err / static_cast<double>(count);
        sample_grad[i] = QNetworkParams::zeros(cfg);
        diff.backward(dq, sample_grad[i]);
    });
    grad.set_zero();
    double loss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        grad.add_scaled(sample_grad[i], 1.0);
        loss += sq_err[i];
    }
    return loss / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid train config: " + what); };
    if (n < 2) fail("n must be at least 2");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) fail("t_max must be positive");
    if (batch_size < 1) fail("batch_size must be positive");
    if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
    if (replay_capacity < static_cast<std::size_t>(batch_size)) fail("replay_capacity must be at least batch_size");
    if (target_sync < 1) fail("target_sync must be positive");
    if (parallel_envs < 1) fail("parallel_envs must be positive");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("epsilon_start must lie in [0, 1]");
    if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) fail("epsilon_end must lie in [0, 1]");
    if (epsilon_decay_steps && *epsilon_decay_steps < 1) fail("epsilon_decay_steps must be positive");
    if (max_steps < 0) fail("max_steps must be nonnegative");
    if (validation_size < 1) fail("validation_size must be positive");
    if (eval_period < 1) fail("eval_period must be positive");
    if (log_period < 1) fail("log_period must be positive");
    if (threads < 1) fail("threads must be positive");
    network.validate();
}

int TrainConfig::decay_steps() const {
    return epsilon_decay_steps ? *epsilon_decay_steps : std::max(1, max_steps / 2);
}

double TrainConfig::epsilon_at(int step) const {
    const double frac = std::min(1.0, static_cast<double>(step) / decay_steps());
    return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

std::string train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["kind"] = std::string(to_string(cfg.kind));
    j["t_max"] = cfg.t_max;
    j["batch_size"] = cfg.batch_size;
    j["learning_rate"] = cfg.learning_rate;
    j["replay_capacity"] = cfg.replay_capacity;
    j["target_sync"] = cfg.target_sync;
    j["parallel_envs"] = cfg.parallel_envs;
    j["epsilon_start"] = cfg.epsilon_start;
    j["epsilon_end"] = cfg.epsilon_end;
    j["epsilon_decay_steps"] = cfg.epsilon_decay_steps ? json(*cfg.epsilon_decay_steps) : json(nullptr);
    j["max_steps"] = cfg.max_steps;
    j["validation_size"] = cfg.validation_size;
    j["eval_period"] = cfg.eval_period;
    j["log_period"] = cfg.log_period;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["network"] = detail::network_config_to_json(cfg.network);
    return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw ParseError("train config must be a JSON object");
    TrainConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n") cfg.n = value.get<int>();
            else if (key == "kind") {
                const auto kind = parse_prize_kind(value.get<std::string>());
                if (!kind) throw ParseError("unknown prize kind " + value.get<std::string>());
                cfg.kind = *kind;
            } else if (key == "t_max") cfg.t_max = value.get<double>();
            else if (key == "batch_size") cfg.batch_size = value.get<int>();
            else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
            else if (key == "replay_capacity") cfg.replay_capacity = value.get<std::size_t>();
            else if (key == "target_sync") cfg.target_sync = value.get<int>();
            else if (key == "parallel_envs") cfg.parallel_envs = value.get<int>();
            else if (key == "epsilon_start") cfg.epsilon_start = value.get<double>();
            else if (key == "epsilon_end") cfg.epsilon_end = value.get<double>();
            else if (key == "epsilon_decay_steps") {
                if (value.is_null()) cfg.epsilon_decay_steps.reset();
                else cfg.epsilon_decay_steps = value.get<int>();
            } else if (key == "max_steps") cfg.max_steps = value.get<int>();
            else if (key == "validation_size") cfg.validation_size = value.get<int>();
            else if (key == "eval_period") cfg.eval_period = value.get<int>();
            else if (key == "log_period") cfg.log_period = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else if (key == "network") cfg.network = detail::network_config_from_json(value);
            else throw ParseError("unknown train config key \"" + key + "\"");
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed train config: ") + e.what());
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

std::string to_ndjson(const TrainLogRecord& rec) {
    json j;
    j["step"] = rec.step;
    j["loss"] = rec.loss;
    j["epsilon"] = rec.epsilon;
    j["val_mean_prize"] = rec.validation_mean ? json(*rec.validation_mean) : json(nullptr);
    return j.dump();
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

constexpr std::uint64_t kEnvStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kValidationStream = 3;
constexpr std::uint64_t kEpisodeStream = 4;

struct Env {
    std::shared_ptr<const Instance> instance;
    PathState state;
};

}  // namespace

std::vector<Instance> validation_instances(const TrainConfig& cfg) {
    const std::uint64_t base = derive_seed(cfg.seed, kValidationStream);
    std::vector<Instance> out;
    out.reserve(static_cast<std::size_t>(cfg.validation_size));
    for (int i = 0; i < cfg.validation_size; ++i) {
        out.push_back(generate_euclidean_instance(cfg.n, cfg.kind, cfg.t_max, derive_seed(base, i)));
    }
    return out;
}

TrainResult train(const TrainConfig& cfg, const std::function<void(const TrainLogRecord&)>& on_record) {
    cfg.validate();
    const auto validation = validation_instances(cfg);
    const std::uint64_t episode_base = derive_seed(cfg.seed, kEpisodeStream);
    std::uint64_t episodes = 0;

    QNetwork online(cfg.network, init_params(cfg.network), cfg.threads);
    QNetwork target(cfg.network, online.params(), cfg.threads);
    AdamOptimizer adam(cfg.network, cfg.learning_rate);
    ReplayMemory replay(cfg.replay_capacity);
    Rng env_rng(derive_seed(cfg.seed, kEnvStream));
    Rng sample_rng(derive_seed(cfg.seed, kSampleStream));

    auto new_episode = [&]() {
        for (;;) {
            auto inst = std::make_shared<const Instance>(
                generate_euclidean_instance(cfg.n, cfg.kind, cfg.t_max, derive_seed(episode_base, episodes++)));
            PathState s = PathState::initial(*inst);
            if (!feasible_extensions(s, *inst).empty()) return Env{std::move(inst), std::move(s)};
        }
    };
    std::vector<Env> envs;
    for (int b = 0; b < cfg.parallel_envs; ++b) envs.push_back(new_episode());

    auto validate_now = [&]() {
        const QValuePolicy policy(online);
        return evaluate(policy, validation, cfg.threads).mean;
    };

    TrainResult result;
    result.best_params = online.params();
    result.best_validation = validate_now();
    result.best_step = 0;

    auto emit = [&](TrainLogRecord rec) {
        if (on_record) on_record(rec);
        result.log.push_back(std::move(rec));
    };
    emit(TrainLogRecord{0, 0.0, cfg.epsilon_at(0), result.best_validation});

    QNetworkParams grad = QNetworkParams::zeros(cfg.network);
    double loss_sum = 0.0;
    int loss_count = 0;

    for (int step = 1; step <= cfg.max_steps; ++step) {
        const double eps = cfg.epsilon_at(step - 1);

        // Act in every environment; q maps are computed in parallel, actions
        // and pushes happen in environment order.
        std::vector<std::vector<double>> q_maps(envs.size());
        parallel_for(envs.size(), cfg.threads, [&](std::size_t b) {
            q_maps[b] = forward_q(*envs[b].instance, envs[b].state, online.params(), cfg.network);
        });
        for (std::size_t b = 0; b < envs.size(); ++b) {
            Env& env = envs[b];
            const NodeId v = epsilon_greedy(*env.instance, env.state, q_maps[b], eps, env_rng);
            StepResult sr = env_step(*env.instance, env.state, v);
            replay.push(Transition{env.instance, env.state, v, sr.reward, sr.next, sr.done});
            if (sr.done) {
                env = new_episode();
            } else {
                env.state = std::move(sr.next);
            }
        }

        if (replay.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            const auto idx = replay.sample_indices(static_cast<std::size_t>(cfg.batch_size), sample_rng);
            std::vector<Transition> batch;
            batch.reserve(idx.size());
            for (std::size_t i : idx) batch.push_back(replay.at(i));

            std::vector<double> y(batch.size());
            parallel_for(batch.size(), cfg.threads, [&](std::size_t i) {
                y[i] = double_q_target(std::span<const Transition>(&batch[i], 1), online, target)[0];
            });
            const double loss = td_loss_and_gradient(online.params(), cfg.network, batch, y, grad, cfg.threads);
            if (!std::isfinite(loss)) {
                throw NetworkError("non-finite loss at step " + std::to_string(step));
            }
            adam.step(online.mutable_params(), grad);
            check_finite(online.params(), "parameters after step " + std::to_string(step));
            loss_sum += loss;
            ++loss_count;
            if (adam.steps_taken() % cfg.target_sync == 0) {
                target.mutable_params() = online.params();
            }
        }

        const bool eval_due = step % cfg.eval_period == 0 || step == cfg.max_steps;
        const bool log_due = step % cfg.log_period == 0;
        if (!eval_due && !log_due) continue;
        TrainLogRecord rec;
        rec.step = step;
        rec.loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
        rec.epsilon = cfg.epsilon_at(step);
        if (eval_due) {
            rec.validation_mean = validate_now();
            if (*rec.validation_mean > result.best_validation) {
                result.best_validation = *rec.validation_mean;
                result.best_params = online.params();
                result.best_step = step;
            }
        }
        loss_sum = 0.0;
        loss_count = 0;
        emit(std::move(rec));
    }
    return result;
}

namespace {

template <typename Rollout>
EvalResult evaluate_with(std::span<const Instance> instances, int threads, Rollout&& rollout) {
    if (instances.empty()) throw std::invalid_argument("evaluate on an empty instance set");
    EvalResult out;
    out.per_instance.resize(instances.size());
    parallel_for(instances.size(), threads, [&](std::size_t i) { out.per_instance[i] = rollout(i); });
    double sum = 0.0;
    for (double p : out.per_instance) sum += p;
    out.mean = sum / static_cast<double>(instances.size());
    return out;
}

}  // namespace

EvalResult evaluate(const StatePolicy& policy, std::span<const Instance> instances, int threads) {
    return evaluate_with(instances, threads, [&](std::size_t i) {
        return greedy_rollout(instances[i], policy).best_path.prize();
    });
}

EvalResult evaluate_sampled(const StatePolicy& policy, std::span<const Instance> instances,
                            std::uint64_t seed, int threads) {
    return evaluate_with(instances, threads, [&](std::size_t i) {
        return sampled_rollout(instances[i], policy, derive_seed(seed, i)).best_path.prize();
    });
}

}  // namespace opbeam
