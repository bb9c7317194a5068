#pragma once

#include <vector>

#include "opbeam/network.hpp"

namespace opbeam {

struct GatHeadTape {
    Matrix node_part;      ///< P_v = A x_v + d g   (m x hidden)
    Matrix neighbor_part;  ///< Q_k = B x_k         (m x hidden)
    Matrix logits_pre;     ///< a . z_vk before LeakyReLU (m x m)
    Matrix alpha;          ///< softmax over k != v (m x m, zero diagonal)
    Vector edge_mean;      ///< sum_k alpha_vk u_vk  (m)
};

struct GatTape {
    StateEncoding enc;
    std::vector<GatHeadTape> heads;
    Matrix pre;  ///< head mean before activation
    Matrix out;
};

struct LayerNormTape {
    Matrix xhat;
    Vector inv_std;
};

struct TelLayerTape {
    Matrix input;
    Matrix q, k, v;
    std::vector<Matrix> attn;  ///< per head, m x m
    Matrix concat;             ///< attention output before wo
    LayerNormTape ln1;
    Matrix x1;
    Matrix ff_pre;
    Matrix ff_act;
    LayerNormTape ln2;
    Matrix out;
};

struct ForwardTape {
    GatTape gat;
    std::vector<TelLayerTape> tel;
    Vector q;
};

namespace detail {

inline constexpr double kLayerNormEps = 1e-5;

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LayerNormTape* tape);
Matrix gat_forward_taped(const StateEncoding& enc, const QNetworkParams& params,
                         const QNetworkConfig& cfg, GatTape* tape);
Matrix tel_layer_forward(const Matrix& x, const TelLayer& layer, const QNetworkConfig& cfg,
                         TelLayerTape* tape);
double activate(Activation act, double x);
/// Derivative expressed through the pre-activation value.
double activate_grad(Activation act, double x);

}  // namespace detail
}  // namespace opbeam
