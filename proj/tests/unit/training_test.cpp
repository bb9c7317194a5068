#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "opbeam/generator.hpp"
#include "opbeam/heuristics.hpp"
#include "opbeam/instance_io.hpp"
#include "opbeam/search.hpp"
#include "opbeam/training.hpp"
#include "oracles.hpp"

using namespace opbeam;
using opbeam::testing::hand_instance;

namespace {

QNetworkConfig tiny_net(std::uint64_t seed = 2) {
    QNetworkConfig cfg;
    cfg.hidden = 8;
    cfg.gat_heads = 2;
    cfg.tel_heads = 2;
    cfg.tel_layers = 1;
    cfg.seed = seed;
    return cfg;
}

TrainConfig smoke_config() {
    TrainConfig cfg;
    cfg.n = 6;
    cfg.t_max = 1.0;
    cfg.batch_size = 16;
    cfg.parallel_envs = 4;
    cfg.max_steps = 60;
    cfg.eval_period = 20;
    cfg.log_period = 10;
    cfg.validation_size = 20;
    cfg.target_sync = 10;
    cfg.replay_capacity = 500;
    cfg.network = tiny_net();
    cfg.seed = 5;
    return cfg;
}

std::vector<Transition> episode_transitions(std::shared_ptr<const Instance> inst, std::uint64_t seed) {
    std::vector<Transition> out;
    Rng rng(seed);
    auto s = PathState::initial(*inst);
    for (;;) {
        const auto f = feasible_extensions(s, *inst);
        if (f.empty()) break;
        const NodeId v = f[uniform_index(rng, f.size())];
        const auto r = env_step(*inst, s, v);
        out.push_back({inst, s, v, r.reward, r.next, r.done});
        s = r.next;
    }
    return out;
}

}  // namespace

TEST(Env, StepRewardsAndTermination) {
    const auto inst = hand_instance();
    const auto s0 = PathState::initial(inst);
    const auto r = env_step(inst, s0, 2);
    EXPECT_DOUBLE_EQ(r.reward, 0.6);
    EXPECT_TRUE(r.done);
    EXPECT_THROW(env_step(inst, s0, 0), std::invalid_argument);
    EXPECT_THROW(env_step(inst, s0, 3), std::invalid_argument);
    EXPECT_THROW(env_step(inst, r.next, 1), std::invalid_argument);

    const auto zero = Instance::create({{0, 0.1, 0.1}, {0.1, 0, 0.1}, {0.1, 0.1, 0}}, {0, 0, 0}, 1.0, 0, 2);
    EXPECT_EQ(env_step(zero, PathState::initial(zero), 1).reward, 0.0);
}

TEST(Env, RewardsTelescopeToPathPrize) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto inst = std::make_shared<const Instance>(generate_euclidean_instance(15, PrizeKind::Uniform, 2.0, seed));
        const auto ts = episode_transitions(inst, seed);
        double total = 0.0;
        for (const auto& t : ts) {
            total += t.reward;
            EXPECT_EQ(t.reward, inst->prize(t.action));
            EXPECT_EQ(t.done, feasible_extensions(t.next, *inst).empty());
        }
        ASSERT_FALSE(ts.empty());
        EXPECT_TRUE(ts.back().done);
        EXPECT_NEAR(total, close_path(ts.back().next, *inst).prize(), 1e-12);
    }
}

TEST(EpsilonGreedy, Extremes) {
    const auto inst = generate_euclidean_instance(10, PrizeKind::Uniform, 2.0, 1);
    const auto s = PathState::initial(inst);
    const auto f = feasible_extensions(s, inst);
    std::vector<double> q(10, -std::numeric_limits<double>::infinity());
    for (NodeId v : f) q[v] = 0.0;
    q[f[2]] = 1.0;
    Rng rng(0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(epsilon_greedy(inst, s, q, 0.0, rng), f[2]);

    std::vector<int> counts(10, 0);
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) ++counts[epsilon_greedy(inst, s, q, 1.0, rng)];
    const double p = 1.0 / f.size();
    for (NodeId v : f) EXPECT_NEAR(counts[v], trials * p, 4 * std::sqrt(trials * p * (1 - p)));

    // ties go to the lowest index
    for (NodeId v : f) q[v] = 0.5;
    EXPECT_EQ(epsilon_greedy(inst, s, q, 0.0, rng), f[0]);
}

TEST(EpsilonGreedy, SingleFeasibleNode) {
    const auto inst = Instance::create({{0, 0.1, 5}, {0.1, 0, 0.1}, {5, 0.1, 0}}, {0, 0.5, 0.5}, 0.3, 0, 0);
    const auto s = PathState::initial(inst);
    ASSERT_EQ(feasible_extensions(s, inst).size(), 1u);
    Rng rng(1);
    const std::vector<double> q{-INFINITY, 0.0, -INFINITY};
    for (double eps : {0.0, 0.5, 1.0}) EXPECT_EQ(epsilon_greedy(inst, s, q, eps, rng), 1);
}

TEST(Replay, FifoEvictionAndSampling) {
    ReplayMemory mem(5);
    auto inst = std::make_shared<const Instance>(hand_instance());
    for (int i = 0; i < 8; ++i) {
        mem.push({inst, PathState::initial(*inst), 1, static_cast<double>(i), PathState::initial(*inst), false});
        EXPECT_LE(mem.size(), mem.capacity());
    }
    ASSERT_EQ(mem.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(mem.at(i).reward, 3.0 + i);
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto idx = mem.sample_indices(4, rng);
        EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 4u);
        for (auto i : idx) EXPECT_LT(i, mem.size());
    }
    EXPECT_THROW(mem.sample_indices(6, rng), std::invalid_argument);
}

TEST(DoubleQ, TerminalAndVanillaCollapse) {
    auto inst = std::make_shared<const Instance>(generate_euclidean_instance(10, PrizeKind::Uniform, 2.0, 3));
    const auto cfg = tiny_net();
    const QNetwork net(cfg, init_params(cfg));
    const auto ts = episode_transitions(inst, 4);
    const auto y = double_q_target(ts, net, net);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].done) {
            EXPECT_EQ(y[i], ts[i].reward);
        } else {
            const auto q = net.q_values(*inst, ts[i].next);
            EXPECT_DOUBLE_EQ(y[i], ts[i].reward + estimate_subsequent_prize(q));
        }
    }
    const auto hand = std::make_shared<const Instance>(hand_instance());
    const auto r = env_step(*hand, PathState::initial(*hand), 2);
    const Transition term{hand, PathState::initial(*hand), 2, r.reward, r.next, r.done};
    EXPECT_DOUBLE_EQ(double_q_target(std::span<const Transition>(&term, 1), net, net)[0], 0.6);
    EXPECT_THROW(double_q_target({}, net, net), std::invalid_argument);
}

TEST(DoubleQ, SelectionByOnlineEvaluationByTarget) {
    auto inst = std::make_shared<const Instance>(generate_euclidean_instance(10, PrizeKind::Uniform, 2.0, 3));
    const auto cfg = tiny_net();
    const QNetwork online(cfg, init_params(cfg));
    const QNetwork target(cfg, init_params(tiny_net(77)));
    const auto ts = episode_transitions(inst, 4);
    const auto y = double_q_target(ts, online, target);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].done) continue;
        const auto qo = online.q_values(*inst, ts[i].next);
        const auto qt = target.q_values(*inst, ts[i].next);
        const auto a = std::max_element(qo.begin(), qo.end()) - qo.begin();
        EXPECT_DOUBLE_EQ(y[i], ts[i].reward + qt[a]);
    }
}

TEST(DoubleQ, PerfectTableHasZeroResidual) {
    const opbeam::testing::ExactQModel oracle;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto inst = std::make_shared<const Instance>(generate_euclidean_instance(7, PrizeKind::Uniform, 1.0, 60 + seed));
        const auto ts = episode_transitions(inst, seed);
        const auto y = double_q_target(ts, oracle, oracle);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            EXPECT_NEAR(y[i], oracle.q_values(*inst, ts[i].state)[ts[i].action], 1e-9);
        }
    }
}

TEST(Adam, FirstStepMovesByLearningRate) {
    const auto cfg = tiny_net();
    auto params = init_params(cfg);
    const auto before = params;
    auto grad = QNetworkParams::zeros(cfg);
    grad.projection.setConstant(0.3);
    grad.projection(0, 0) = -2.0;
    AdamOptimizer adam(cfg, 0.01);
    adam.step(params, grad);
    EXPECT_NEAR(params.projection(0, 0) - before.projection(0, 0), 0.01, 1e-9);
    EXPECT_NEAR(params.projection(0, 1) - before.projection(0, 1), -0.01, 1e-9);
    EXPECT_TRUE(params.gat[0].weight == before.gat[0].weight);
    EXPECT_EQ(adam.steps_taken(), 1);
}

TEST(TdLoss, GradientMatchesFiniteDifferenceAndIsThreadInvariant) {
    auto inst = std::make_shared<const Instance>(generate_euclidean_instance(8, PrizeKind::Uniform, 2.0, 9));
    const auto cfg = tiny_net();
    auto params = init_params(cfg);
    const auto ts = episode_transitions(inst, 1);
    std::vector<double> y(ts.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.3 * static_cast<double>(i);

    auto grad1 = QNetworkParams::zeros(cfg);
    auto grad3 = QNetworkParams::zeros(cfg);
    const double l1 = td_loss_and_gradient(params, cfg, ts, y, grad1, 1);
    const double l3 = td_loss_and_gradient(params, cfg, ts, y, grad3, 3);
    EXPECT_EQ(l1, l3);
    EXPECT_TRUE(grad1 == grad3);

    auto loss = [&](const QNetworkParams& p) {
        double total = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double e = forward_q(*inst, ts[i].state, p, cfg)[ts[i].action] - y[i];
            total += e * e;
        }
        return total / static_cast<double>(ts.size());
    };
    EXPECT_NEAR(loss(params), l1, 1e-12);
    Matrix& w = params.tel[0].ff1;
    for (Eigen::Index i = 0; i < 6; ++i) {
        const double numeric = opbeam::testing::central_difference(params, w, i * 5, 1e-5, loss);
        EXPECT_TRUE(opbeam::testing::close_relative(grad1.tel[0].ff1.data()[i * 5], numeric, 1e-4, 1e-9));
    }
}

TEST(TrainConfigTest, DefaultsAndJson) {
    const TrainConfig d;
    EXPECT_EQ(d.network.gat_heads, 20);
    EXPECT_EQ(d.network.tel_heads, 8);
    EXPECT_EQ(d.network.tel_layers, 4);
    EXPECT_EQ(d.network.hidden, 64);
    EXPECT_EQ(d.learning_rate, 1e-3);
    EXPECT_EQ(d.replay_capacity, 10000u);
    EXPECT_EQ(d.target_sync, 100);
    EXPECT_EQ(d.parallel_envs, 16);
    EXPECT_EQ(d.validation_size, 200);

    const auto text = train_config_to_json(d);
    EXPECT_EQ(train_config_to_json(train_config_from_json(text)), text);
    const auto partial = train_config_from_json(R"({"n": 10, "network": {"hidden": 32, "gat_heads": 4}})");
    EXPECT_EQ(partial.n, 10);
    EXPECT_EQ(partial.network.hidden, 32);
    EXPECT_EQ(partial.network.tel_layers, 4);
    EXPECT_THROW(train_config_from_json(R"({"bogus": 1})"), ParseError);
    EXPECT_THROW(train_config_from_json(R"({"epsilon_end": 1.5})"), ParseError);
    EXPECT_THROW(train_config_from_json(R"({"kind": "zigzag"})"), ParseError);
    EXPECT_THROW(train_config_from_json(R"({"batch_size": 0})"), ParseError);
}

TEST(TrainConfigTest, EpsilonSchedule) {
    TrainConfig cfg;
    cfg.max_steps = 1000;
    EXPECT_EQ(cfg.epsilon_at(0), 1.0);
    EXPECT_NEAR(cfg.epsilon_at(250), 0.525, 1e-12);
    EXPECT_NEAR(cfg.epsilon_at(500), 0.05, 1e-12);
    EXPECT_NEAR(cfg.epsilon_at(900), 0.05, 1e-12);
    cfg.epsilon_decay_steps = 100;
    EXPECT_NEAR(cfg.epsilon_at(100), 0.05, 1e-12);
}

TEST(Train, ZeroStepsReturnsInitialization) {
    auto cfg = smoke_config();
    cfg.max_steps = 0;
    const auto res = train(cfg);
    EXPECT_TRUE(res.best_params == init_params(cfg.network));
    ASSERT_EQ(res.log.size(), 1u);
    EXPECT_EQ(res.log[0].step, 0);
    EXPECT_TRUE(res.log[0].validation_mean.has_value());
}

TEST(Train, DeterministicLog) {
    const auto cfg = smoke_config();
    std::vector<std::string> streamed;
    const auto a = train(cfg, [&](const TrainLogRecord& r) { streamed.push_back(to_ndjson(r)); });
    auto cfg_threads = cfg;
    cfg_threads.threads = 3;
    const auto b = train(cfg_threads);
    ASSERT_EQ(a.log.size(), b.log.size());
    ASSERT_EQ(streamed.size(), a.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        EXPECT_EQ(to_ndjson(a.log[i]), to_ndjson(b.log[i]));
        EXPECT_EQ(streamed[i], to_ndjson(a.log[i]));
    }
    EXPECT_TRUE(a.best_params == b.best_params);
    EXPECT_EQ(a.log.back().step, cfg.max_steps);
    EXPECT_NE(to_ndjson(a.log[1]).find("\"val_mean_prize\":null"), std::string::npos);
}

TEST(Train, SmokeScaleBeatsRandomPolicy) {
    TrainConfig cfg = smoke_config();
    cfg.max_steps = 2000;
    cfg.batch_size = 32;
    cfg.eval_period = 200;
    cfg.log_period = 200;
    cfg.validation_size = 100;
    cfg.target_sync = 50;
    cfg.replay_capacity = 5000;
    cfg.network.hidden = 16;
    cfg.network.tel_heads = 4;
    cfg.network.tel_layers = 2;
    const auto res = train(cfg);
    const auto validation = validation_instances(cfg);
    const double random_mean = evaluate_sampled(RandomPolicy{}, validation, 1).mean;
    const QNetwork net(cfg.network, res.best_params);
    const double learned = evaluate(QValuePolicy(net), validation).mean;
    EXPECT_DOUBLE_EQ(learned, res.best_validation);
    EXPECT_GT(learned, random_mean);
}

TEST(Evaluate, SingletonOracleAndRandom) {
    const auto inst = hand_instance();
    const std::vector<Instance> one{inst};
    EXPECT_DOUBLE_EQ(evaluate(TsiliScorePolicy{}, one).mean, greedy_rollout(inst, TsiliScorePolicy{}).best_path.prize());

    std::vector<Instance> small;
    double opt = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        small.push_back(generate_euclidean_instance(7, PrizeKind::Uniform, 1.0, 80 + s));
        opt += opbeam::testing::brute_force_optimum(small.back()).prize;
    }
    const opbeam::testing::ExactQModel oracle;
    const auto res = evaluate(QValuePolicy(oracle), small, 2);
    EXPECT_NEAR(res.mean, opt / 10.0, 1e-9);
    EXPECT_EQ(res.per_instance.size(), 10u);
    EXPECT_EQ(evaluate_sampled(RandomPolicy{}, small, 3).mean, evaluate_sampled(RandomPolicy{}, small, 3, 2).mean);
    EXPECT_THROW(evaluate(RandomPolicy{}, std::vector<Instance>{}), std::invalid_argument);
}
