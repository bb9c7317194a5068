#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opbeam/instance.hpp"
#include "opbeam/path.hpp"
#include "opbeam/scoring.hpp"

namespace opbeam {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;

enum class Activation { Elu, Sigmoid, Relu, Identity };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

/// Per-node input columns: prize, is-current, is-end.
inline constexpr int kNodeFeatures = 3;
/// GAT input per ordered pair: x_v, x_k, edge cost, remaining budget.
inline constexpr int kGatInput = 2 * kNodeFeatures + 2;

struct QNetworkConfig {
    int hidden = 64;
    int gat_heads = 20;
    int tel_heads = 8;
    int tel_layers = 4;
    int ff_multiplier = 4;  ///< TEL feedforward width = ff_multiplier * hidden
    double leaky_slope = 0.2;
    Activation gat_activation = Activation::Elu;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on non-positive counts or hidden % tel_heads != 0.
    void validate() const;
    bool operator==(const QNetworkConfig&) const = default;
};

/// One GAT head: z_vk = weight * [x_v | x_k | u_vk | g] (hidden x kGatInput),
/// logit = LeakyReLU(attention . z_vk).
struct GatHead {
    Matrix weight;     ///< hidden x kGatInput
    Matrix attention;  ///< 1 x hidden
};

/// Post-norm Transformer encoder layer. Linear maps act on row vectors,
/// y = x W + b, so weights are (in x out) and biases 1 x out.
struct TelLayer {
    Matrix wq, wk, wv, wo;
    Matrix bq, bk, bv, bo;
    Matrix ln1_gain, ln1_bias;
    Matrix ff1;       ///< hidden x ff
    Matrix ff1_bias;
    Matrix ff2;       ///< ff x hidden
    Matrix ff2_bias;
    Matrix ln2_gain, ln2_bias;
};

/// Every learnable tensor of the network. Also used as the gradient container.
struct QNetworkParams {
    std::vector<GatHead> gat;
    std::vector<TelLayer> tel;
    Matrix projection;  ///< 1 x hidden

    /// All tensors shaped for `cfg`, filled with zeros.
    static QNetworkParams zeros(const QNetworkConfig& cfg);

    /// Visits every tensor in a fixed order with a stable dotted name.
    void for_each(const std::function<void(const std::string&, Matrix&)>& fn);
    void for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const;

    std::size_t parameter_count() const;
    bool all_finite() const;
    bool operator==(const QNetworkParams& other) const;

    void set_zero();
    /// this += scale * other (shapes must match).
    void add_scaled(const QNetworkParams& other, double scale);
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], layer-norm gains 1
/// and biases 0. Deterministic in cfg.seed.
QNetworkParams init_params(const QNetworkConfig& cfg);

/// Subproblem induced by a partial path: every unvisited node plus last(P)
/// and the end node, ordered by node index.
struct StateEncoding {
    Matrix node_feat;               ///< m x kNodeFeatures
    Matrix edge_feat;               ///< m x m travel costs
    double budget = 0.0;            ///< T - cost(P)
    std::vector<NodeId> node_ids;   ///< row -> original node
    std::vector<char> mask;         ///< row is a feasible action
    int current_row = -1;
    int end_row = -1;

    int rows() const { return static_cast<int>(node_ids.size()); }
};

StateEncoding encode_state(const Instance& inst, const PathState& path);

/// Returns a copy of `enc` whose rows are reordered so that new row i is old row perm[i].
StateEncoding permute_encoding(const StateEncoding& enc, const std::vector<int>& perm);

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Matrix gat_forward(const StateEncoding& enc, const QNetworkParams& params, const QNetworkConfig& cfg);
Matrix tel_forward(const Matrix& h, const QNetworkParams& params, const QNetworkConfig& cfg);
Vector project_q(const Matrix& h, const QNetworkParams& params);

/// Attention weights of one GAT head (m x m, zero diagonal) for inspection.
Matrix gat_attention(const StateEncoding& enc, const GatHead& head, const QNetworkConfig& cfg);
/// Self-attention weights of one TEL layer and head (m x m).
Matrix tel_attention(const Matrix& h, const TelLayer& layer, int head, const QNetworkConfig& cfg);

/// q for every encoding row (masked rows included, unmasked by this call).
Vector forward_rows(const StateEncoding& enc, const QNetworkParams& params, const QNetworkConfig& cfg);

/// Per-node q map of length inst.size(); nodes that are not feasible actions
/// hold -infinity.
std::vector<double> forward_q(const Instance& inst, const PathState& path,
                              const QNetworkParams& params, const QNetworkConfig& cfg);

/// Intermediate values kept by a forward pass for the reverse sweep.
struct ForwardTape;

/// Reverse-mode differentiation of one encoded state. `forward` records the
/// tape; `backward` accumulates d(loss)/d(params) into `grad` given
/// d(loss)/d(q_row) for every row.
class Differentiator {
public:
    Differentiator(const QNetworkParams& params, const QNetworkConfig& cfg);
    ~Differentiator();
    Differentiator(Differentiator&&) noexcept;
    Differentiator& operator=(Differentiator&&) noexcept;

    const Vector& forward(const StateEncoding& enc);
    void backward(const Vector& dq, QNetworkParams& grad) const;

private:
    const QNetworkParams* params_;
    const QNetworkConfig* cfg_;
    std::unique_ptr<ForwardTape> tape_;
};

/// Throws NetworkError naming the first non-finite tensor in `params`.
void check_finite(const QNetworkParams& params, std::string_view what);

/// The attention network as an action-value model. Batches are evaluated in
/// parallel over `threads` workers; results equal sequential evaluation.
class QNetwork final : public ActionValueModel {
public:
    QNetwork(QNetworkConfig cfg, QNetworkParams params, int threads = 1);

    const QNetworkConfig& config() const { return cfg_; }
    const QNetworkParams& params() const { return params_; }
    QNetworkParams& mutable_params() { return params_; }

    std::vector<double> q_values(const Instance& inst, const PathState& path) const override;
    std::vector<std::vector<double>> q_values_batch(const Instance& inst,
                                                    std::span<const PathState> paths) const override;

private:
    QNetworkConfig cfg_;
    QNetworkParams params_;
    int threads_;
};

}  // namespace opbeam
