#include <gtest/gtest.h>

#include <string>

#include "opbeam/generator.hpp"
#include "opbeam/network.hpp"
#include "oracles.hpp"

using namespace opbeam;
using namespace opbeam::testing;

namespace {

std::vector<StateEncoding> sample_encodings(int count, std::uint64_t seed) {
    std::vector<StateEncoding> out;
    for (int i = 0; i < count; ++i) {
        const auto inst = generate_euclidean_instance(9, PrizeKind::Uniform, 2.0, seed + i);
        auto p = PathState::initial(inst);
        for (int s = 0; s < i % 3; ++s) p = extend(p, feasible_extensions(p, inst)[s], inst);
        out.push_back(encode_state(inst, p));
    }
    return out;
}

QNetworkConfig tiny(Activation act) {
    QNetworkConfig cfg;
    cfg.hidden = 8;
    cfg.gat_heads = 2;
    cfg.tel_heads = 2;
    cfg.tel_layers = 2;
    cfg.gat_activation = act;
    cfg.seed = 4;
    return cfg;
}

}  // namespace

class GradientByLayer : public ::testing::TestWithParam<LayerType> {};

TEST_P(GradientByLayer, MatchesCentralDifferences) {
    for (Activation act : {Activation::Elu, Activation::Sigmoid}) {
        const auto cfg = tiny(act);
        const auto params = init_params(cfg);
        const auto report = gradient_check(cfg, params, sample_encodings(3, 10), GetParam(), 64, 99);
        EXPECT_EQ(report.checked, 64);
        EXPECT_EQ(report.failed, 0) << layer_type_name(GetParam()) << " worst " << report.worst_error;
    }
}

INSTANTIATE_TEST_SUITE_P(AllLayers, GradientByLayer,
                         ::testing::Values(LayerType::GatHead, LayerType::TelAttention,
                                           LayerType::TelFeedForward, LayerType::LayerNorm,
                                           LayerType::Projection),
                         [](const ::testing::TestParamInfo<LayerType>& info) {
                             std::string name(layer_type_name(info.param));
                             std::erase(name, ' ');
                             return name;
                         });

TEST(Gradient, ProjectionGradientIsEmbedding) {
    const auto cfg = tiny(Activation::Elu);
    const auto params = init_params(cfg);
    const auto enc = sample_encodings(1, 3)[0];
    const Matrix h = tel_forward(gat_forward(enc, params, cfg), params, cfg);
    for (int v = 0; v < enc.rows(); ++v) {
        Differentiator diff(params, cfg);
        diff.forward(enc);
        Vector dq = Vector::Zero(enc.rows());
        dq(v) = 1.0;
        QNetworkParams grad = QNetworkParams::zeros(cfg);
        diff.backward(dq, grad);
        EXPECT_LT((grad.projection.row(0) - h.row(v)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Gradient, ZeroUpstreamGivesZeroGradient) {
    const auto cfg = tiny(Activation::Elu);
    const auto params = init_params(cfg);
    const auto enc = sample_encodings(1, 3)[0];
    Differentiator diff(params, cfg);
    const Vector q = diff.forward(enc);
    EXPECT_LT((q - forward_rows(enc, params, cfg)).cwiseAbs().maxCoeff(), 1e-14);
    QNetworkParams grad = QNetworkParams::zeros(cfg);
    diff.backward(Vector::Zero(enc.rows()), grad);
    grad.for_each([](const std::string& name, const Matrix& t) { EXPECT_TRUE((t.array() == 0.0).all()) << name; });
}

TEST(Gradient, DeterministicAndAccumulating) {
    const auto cfg = tiny(Activation::Elu);
    const auto params = init_params(cfg);
    const auto enc = sample_encodings(2, 30)[1];
    Vector dq = Vector::LinSpaced(enc.rows(), -1.0, 1.0);
    QNetworkParams g1 = QNetworkParams::zeros(cfg), g2 = QNetworkParams::zeros(cfg);
    Differentiator a(params, cfg), b(params, cfg);
    a.forward(enc);
    b.forward(enc);
    a.backward(dq, g1);
    b.backward(dq, g2);
    EXPECT_TRUE(g1 == g2);
    a.backward(dq, g1);
    g1.add_scaled(g2, -2.0);
    g1.for_each([](const std::string& name, const Matrix& t) { EXPECT_LT(t.cwiseAbs().maxCoeff(), 1e-12) << name; });
}

TEST(Gradient, NonFiniteParametersAreReported) {
    const auto cfg = tiny(Activation::Elu);
    auto params = init_params(cfg);
    params.tel[1].ff1(0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        check_finite(params, "test");
        FAIL() << "expected NetworkError";
    } catch (const NetworkError& e) {
        EXPECT_NE(std::string(e.what()).find("tel.1.ff1"), std::string::npos) << e.what();
    }
}
