#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "opbeam/generator.hpp"
#include "opbeam/instance.hpp"
#include "opbeam/instance_io.hpp"
#include "opbeam/path.hpp"
#include "oracles.hpp"

using namespace opbeam;
using opbeam::testing::hand_instance;

TEST(Instance, DegenerateTwoNodeInstance) {
    const auto inst = Instance::create({{0, 0}, {0, 0}}, {0, 0}, 1.0, 0, 1);
    EXPECT_EQ(inst.size(), 2);
    EXPECT_EQ(inst.start(), 0);
    EXPECT_EQ(inst.end(), 1);
}

TEST(Instance, RejectsNonzeroDiagonal) {
    EXPECT_THROW(Instance::create({{0.1, 0}, {0, 0}}, {0, 0}, 1.0, 0, 1), InstanceError);
}

TEST(Instance, AcceptsAsymmetricCosts) {
    const auto inst = Instance::create({{0, 0.2, 0.5}, {0.9, 0, 0.4}, {0.5, 0.4, 0}}, {0, 0.5, 0}, 1.0, 0, 2);
    EXPECT_DOUBLE_EQ(inst.cost(0, 1), 0.2);
    EXPECT_DOUBLE_EQ(inst.cost(1, 0), 0.9);
}

TEST(Instance, RejectsMalformedInput) {
    EXPECT_THROW(Instance::create({{0, 1}, {1, 0}}, {0, 0, 0}, 1.0, 0, 1), InstanceError);
    EXPECT_THROW(Instance::create({{0, 1}, {1}}, {0, 0}, 1.0, 0, 1), InstanceError);
    EXPECT_THROW(Instance::create({{0, -1}, {1, 0}}, {0, 0}, 1.0, 0, 1), InstanceError);
    EXPECT_THROW(Instance::create({{0, 1}, {1, 0}}, {0, 0}, 1.0, 0, 2), InstanceError);
    EXPECT_THROW(Instance::create({{0, 1}, {1, 0}}, {0, 0}, 1.0, -1, 1), InstanceError);
    EXPECT_THROW(Instance::create({{0, 1}, {1, 0}}, {0, 0}, -1.0, 0, 1), InstanceError);
    EXPECT_THROW(Instance::create({{0, 1}, {1, 0}}, {0, 1.5}, 1.0, 0, 0), InstanceError);
}

TEST(Instance, EndpointPrizesForcedToZero) {
    const auto inst = Instance::create({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}, {0.7, 0.5, 0.9}, 1.0, 0, 2);
    EXPECT_EQ(inst.prize(0), 0.0);
    EXPECT_EQ(inst.prize(1), 0.5);
    EXPECT_EQ(inst.prize(2), 0.0);
}

TEST(Path, ExtendUpdatesCostAndPrize) {
    const auto inst = Instance::create({{0, 0.4, 0.3}, {0.4, 0, 0.2}, {0.3, 0.2, 0}}, {0, 0, 0.5}, 2.0, 0, 1);
    const auto p0 = PathState::initial(inst);
    const auto p1 = extend(p0, 2, inst);
    EXPECT_DOUBLE_EQ(p1.cost(), 0.3);
    EXPECT_DOUBLE_EQ(p1.prize(), 0.5);
    // value semantics
    EXPECT_EQ(p0.length(), 1u);
    EXPECT_EQ(p0.cost(), 0.0);
}

TEST(Path, ExtendErrors) {
    const auto inst = hand_instance();
    const auto p0 = PathState::initial(inst);
    EXPECT_THROW(extend(p0, 0, inst), PathError);
    const auto closed = close_path(extend(p0, 2, inst), inst);
    EXPECT_THROW(extend(closed, 1, inst), PathError);
}

TEST(Path, FeasibleExtensionsOnHandInstance) {
    const auto inst = hand_instance();
    const auto p0 = PathState::initial(inst);
    EXPECT_EQ(feasible_extensions(p0, inst), (std::vector<NodeId>{1, 2}));
    const auto pa = extend(p0, 1, inst);
    EXPECT_TRUE(feasible_extensions(pa, inst).empty());
}

TEST(Path, ZeroBudgetHasNoExtensions) {
    const auto inst = Instance::create({{0, 0.1, 0.1}, {0.1, 0, 0.1}, {0.1, 0.1, 0}}, {0, 1, 0}, 0.0, 0, 2);
    EXPECT_TRUE(feasible_extensions(PathState::initial(inst), inst).empty());
}

TEST(Path, InclusiveBudget) {
    // exactly T is feasible
    const auto inst = Instance::create({{0, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0}}, {0, 1, 0}, 1.0, 0, 2);
    EXPECT_EQ(feasible_extensions(PathState::initial(inst), inst), (std::vector<NodeId>{1}));
}

TEST(Path, CloseBehaviour) {
    const auto inst = hand_instance();
    const auto closed0 = close_path(PathState::initial(inst), inst);
    EXPECT_TRUE(closed0.closed());
    EXPECT_EQ(closed0.cost(), 0.0);

    const auto pb = close_path(extend(PathState::initial(inst), 2, inst), inst);
    EXPECT_NEAR(pb.cost(), 0.6, 1e-12);
    EXPECT_EQ(pb.last(), 3);

    const auto far = Instance::create({{0, 2}, {2, 0}}, {0, 0}, 1.0, 0, 1);
    EXPECT_THROW(close_path(PathState::initial(far), far), PathError);
}

TEST(Path, CachedValuesMatchRecomputation) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = opbeam::testing::random_general_instance(9, 3.0, seed);
        auto p = PathState::initial(inst);
        for (;;) {
            const auto ext = feasible_extensions(p, inst);
            if (ext.empty()) break;
            p = extend(p, ext[seed % ext.size()], inst);
            EXPECT_NEAR(recompute_cost(p.nodes(), inst), p.cost(), 1e-9);
            EXPECT_NEAR(recompute_prize(p.nodes(), inst), p.prize(), 1e-9);
            for (NodeId v = 0; v < inst.size(); ++v) {
                const bool in_path = std::find(p.nodes().begin(), p.nodes().end(), v) != p.nodes().end();
                EXPECT_EQ(p.visited(v), in_path);
            }
        }
        const auto closed = close_path(p, inst);
        EXPECT_LE(closed.cost(), inst.t_max());
        EXPECT_NEAR(recompute_cost(closed.nodes(), inst), closed.cost(), 1e-9);
    }
}

TEST(Path, FromNodes) {
    const auto inst = hand_instance();
    const std::vector<NodeId> nodes{0, 2, 3};
    const auto p = path_from_nodes(nodes, inst);
    EXPECT_TRUE(p.closed());
    EXPECT_DOUBLE_EQ(p.prize(), 0.6);
}

TEST(Generator, DistancePrizeFormula) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = generate_euclidean_instance(20, PrizeKind::Distance, 2.0, seed);
        double far = 0.0;
        for (NodeId v = 1; v < 20; ++v) far = std::max(far, inst.cost(0, v));
        bool saw_max = false;
        for (NodeId v = 1; v < 20; ++v) {
            const double expect = (1.0 + std::floor(99.0 * inst.cost(0, v) / far)) / 100.0;
            EXPECT_DOUBLE_EQ(inst.prize(v), expect);
            if (inst.cost(0, v) == far) {
                EXPECT_DOUBLE_EQ(inst.prize(v), 1.0);
                saw_max = true;
            }
        }
        EXPECT_TRUE(saw_max);
    }
}

TEST(Generator, ConstantAndUniformPrizes) {
    const auto c = generate_euclidean_instance(15, PrizeKind::Constant, 2.0, 3);
    for (NodeId v = 1; v < 15; ++v) EXPECT_EQ(c.prize(v), 1.0);
    const auto u = generate_euclidean_instance(50, PrizeKind::Uniform, 3.0, 3);
    for (NodeId v = 1; v < 50; ++v) {
        const double k = u.prize(v) * 100.0;
        EXPECT_NEAR(k, std::round(k), 1e-9);
        EXPECT_GE(std::round(k), 1.0);
        EXPECT_LE(std::round(k), 100.0);
    }
}

TEST(Generator, DefaultBudgets) {
    EXPECT_EQ(default_budget(20), 2.0);
    EXPECT_EQ(default_budget(50), 3.0);
    EXPECT_EQ(default_budget(100), 4.0);
    EXPECT_FALSE(default_budget(30).has_value());
}

TEST(Generator, DeterministicAndEuclidean) {
    const auto a = generate_euclidean_instance(20, PrizeKind::Uniform, 2.0, 11);
    const auto b = generate_euclidean_instance(20, PrizeKind::Uniform, 2.0, 11);
    const auto c = generate_euclidean_instance(20, PrizeKind::Uniform, 2.0, 12);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
    EXPECT_EQ(a.start(), 0);
    EXPECT_EQ(a.end(), 0);
    for (NodeId u = 0; u < 20; ++u) {
        EXPECT_EQ(a.cost(u, u), 0.0);
        for (NodeId v = 0; v < 20; ++v) {
            EXPECT_EQ(a.cost(u, v), a.cost(v, u));
            for (NodeId w = 0; w < 20; ++w) EXPECT_LE(a.cost(u, w), a.cost(u, v) + a.cost(v, w) + 1e-12);
        }
    }
    for (const auto& p : *a.coords()) {
        EXPECT_GE(p.x, 0.0);
        EXPECT_LT(p.x, 1.0);
        EXPECT_GE(p.y, 0.0);
        EXPECT_LT(p.y, 1.0);
    }
    EXPECT_THROW(generate_euclidean_instance(1, PrizeKind::Uniform, 1.0, 0), InstanceError);
}

TEST(InstanceIo, RoundTripIsExact) {
    const auto hand = hand_instance();
    EXPECT_EQ(instance_from_json(instance_to_json(hand)), hand);
    const auto gen = generate_euclidean_instance(20, PrizeKind::Distance, 2.0, 5);
    const auto back = instance_from_json(instance_to_json(gen));
    EXPECT_EQ(back, gen);
    EXPECT_EQ(back.size(), 20);
    EXPECT_EQ(instance_to_json(back), instance_to_json(gen));

    const auto general = opbeam::testing::random_general_instance(7, 1.3, 2);
    EXPECT_EQ(instance_from_json(instance_to_json(general)), general);
}

TEST(InstanceIo, FileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "opbeam_io_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "hand.json";
    write_instance(hand_instance(), file);
    EXPECT_EQ(read_instance(file), hand_instance());
    std::filesystem::remove_all(dir);
}

TEST(InstanceIo, MissingFieldIsNamed) {
    const std::string text = R"({"n":2,"start":0,"end":1,"prize":[0,0],"cost":[[0,1],[1,0]]})";
    try {
        instance_from_json(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("t_max"), std::string::npos);
    }
    EXPECT_THROW(instance_from_json("{not json"), ParseError);
    EXPECT_THROW(instance_from_json(R"({"n":2,"t_max":1,"start":0,"end":1,"prize":[0,0],"cost":[[0.5,1],[1,0]]})"),
                 InstanceError);
}
