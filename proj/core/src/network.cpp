#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "network_tape.hpp"
#include "opbeam/parallel.hpp"
#include "opbeam/random.hpp"

namespace opbeam {

std::string_view to_string(Activation act) {
    switch (act) {
    case Activation::Elu:
        return "elu";
    case Activation::Sigmoid:
        return "sigmoid";
    case Activation::Relu:
        return "relu";
    case Activation::Identity:
        return "identity";
    }
    return "unknown";
}

Activation parse_activation(std::string_view name) {
    if (name == "elu") return Activation::Elu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void QNetworkConfig::validate() const {
    if (hidden < 1 || gat_heads < 1 || tel_heads < 1 || ff_multiplier < 1) {
        throw std::invalid_argument("network sizes must be positive");
    }
    if (tel_layers < 0) {
        throw std::invalid_argument("tel_layers must be nonnegative");
    }
    if (hidden % tel_heads != 0) {
        throw std::invalid_argument("hidden (" + std::to_string(hidden) +
                                    ") must be divisible by tel_heads (" +
                                    std::to_string(tel_heads) + ")");
    }
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
        throw std::invalid_argument("leaky_slope must lie in [0, 1)");
    }
}

// ---------------------------------------------------------------------------
// Parameter container

QNetworkParams QNetworkParams::zeros(const QNetworkConfig& cfg) {
    cfg.validate();
    const int h = cfg.hidden;
    const int ff = cfg.ff_multiplier * cfg.hidden;
    QNetworkParams p;
    p.gat.resize(cfg.gat_heads);
    for (auto& head : p.gat) {
        head.weight = Matrix::Zero(h, kGatInput);
        head.attention = Matrix::Zero(1, h);
    }
    p.tel.resize(cfg.tel_layers);
    for (auto& l : p.tel) {
        l.wq = l.wk = l.wv = l.wo = Matrix::Zero(h, h);
        l.bq = l.bk = l.bv = l.bo = Matrix::Zero(1, h);
        l.ln1_gain = l.ln1_bias = Matrix::Zero(1, h);
        l.ff1 = Matrix::Zero(h, ff);
        l.ff1_bias = Matrix::Zero(1, ff);
        l.ff2 = Matrix::Zero(ff, h);
        l.ff2_bias = Matrix::Zero(1, h);
        l.ln2_gain = l.ln2_bias = Matrix::Zero(1, h);
    }
    p.projection = Matrix::Zero(1, h);
    return p;
}

namespace {

template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
    for (std::size_t m = 0; m < p.gat.size(); ++m) {
        const std::string base = "gat." + std::to_string(m) + ".";
        fn(base + "weight", p.gat[m].weight);
        fn(base + "attention", p.gat[m].attention);
    }
    for (std::size_t i = 0; i < p.tel.size(); ++i) {
        const std::string base = "tel." + std::to_string(i) + ".";
        auto& l = p.tel[i];
        fn(base + "wq", l.wq);
        fn(base + "bq", l.bq);
        fn(base + "wk", l.wk);
        fn(base + "bk", l.bk);
        fn(base + "wv", l.wv);
        fn(base + "bv", l.bv);
        fn(base + "wo", l.wo);
        fn(base + "bo", l.bo);
        fn(base + "ln1_gain", l.ln1_gain);
        fn(base + "ln1_bias", l.ln1_bias);
        fn(base + "ff1", l.ff1);
        fn(base + "ff1_bias", l.ff1_bias);
        fn(base + "ff2", l.ff2);
        fn(base + "ff2_bias", l.ff2_bias);
        fn(base + "ln2_gain", l.ln2_gain);
        fn(base + "ln2_bias", l.ln2_bias);
    }
    fn(std::string("projection"), p.projection);
}

}  // namespace

void QNetworkParams::for_each(const std::function<void(const std::string&, Matrix&)>& fn) {
    visit_tensors(*this, fn);
}

void QNetworkParams::for_each(const std::function<void(const std::string&, const Matrix&)>& fn) const {
    visit_tensors(*this, fn);
}

std::size_t QNetworkParams::parameter_count() const {
    std::size_t total = 0;
    for_each([&](const std::string&, const Matrix& t) { total += static_cast<std::size_t>(t.size()); });
    return total;
}

bool QNetworkParams::all_finite() const {
    bool ok = true;
    for_each([&](const std::string&, const Matrix& t) { ok = ok && t.allFinite(); });
    return ok;
}

bool QNetworkParams::operator==(const QNetworkParams& other) const {
    std::vector<const Matrix*> mine;
    std::vector<const Matrix*> theirs;
    for_each([&](const std::string&, const Matrix& t) { mine.push_back(&t); });
    other.for_each([&](const std::string&, const Matrix& t) { theirs.push_back(&t); });
    if (mine.size() != theirs.size()) return false;
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i]->rows() != theirs[i]->rows() || mine[i]->cols() != theirs[i]->cols()) return false;
        if (*mine[i] != *theirs[i]) return false;
    }
    return true;
}

void QNetworkParams::set_zero() {
    for_each([](const std::string&, Matrix& t) { t.setZero(); });
}

void QNetworkParams::add_scaled(const QNetworkParams& other, double scale) {
    std::vector<const Matrix*> src;
    other.for_each([&](const std::string&, const Matrix& t) { src.push_back(&t); });
    std::size_t i = 0;
    for_each([&](const std::string& name, Matrix& t) {
        if (i >= src.size() || src[i]->rows() != t.rows() || src[i]->cols() != t.cols()) {
            throw std::invalid_argument("shape mismatch at " + name);
        }
        t.noalias() += scale * *src[i++];
    });
}

void check_finite(const QNetworkParams& params, std::string_view what) {
    params.for_each([&](const std::string& name, const Matrix& t) {
        if (!t.allFinite()) {
            throw NetworkError("non-finite value in " + std::string(what) + " tensor " + name);
        }
    });
}

QNetworkParams init_params(const QNetworkConfig& cfg) {
    QNetworkParams p = QNetworkParams::zeros(cfg);
    Rng rng(cfg.seed);
    const int ff = cfg.ff_multiplier * cfg.hidden;
    auto fill = [&](Matrix& t, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            t.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
        }
    };
    p.for_each([&](const std::string& name, Matrix& t) {
        const auto dot = name.rfind('.');
        const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
        if (leaf == "ln1_gain" || leaf == "ln2_gain") {
            t.setOnes();
        } else if (leaf == "ln1_bias" || leaf == "ln2_bias") {
            t.setZero();
        } else if (leaf == "weight") {
            fill(t, kGatInput);
        } else if (leaf == "ff2" || leaf == "ff2_bias") {
            fill(t, ff);
        } else {
            fill(t, cfg.hidden);
        }
    });
    return p;
}

// ---------------------------------------------------------------------------
// State encoding

StateEncoding encode_state(const Instance& inst, const PathState& path) {
    if (path.closed()) {
        throw PathError("cannot encode a closed path");
    }
    StateEncoding enc;
    const NodeId current = path.last();
    const NodeId end = inst.end();
    for (NodeId v = 0; v < inst.size(); ++v) {
        if (!path.visited(v) || v == current || v == end) {
            enc.node_ids.push_back(v);
        }
    }
    const int m = enc.rows();
    enc.node_feat = Matrix::Zero(m, kNodeFeatures);
    enc.edge_feat = Matrix::Zero(m, m);
    enc.mask.assign(static_cast<std::size_t>(m), 0);
    enc.budget = path.remaining_budget(inst);
    for (int i = 0; i < m; ++i) {
        const NodeId v = enc.node_ids[i];
        enc.node_feat(i, 0) = inst.prize(v);
        enc.node_feat(i, 1) = v == current ? 1.0 : 0.0;
        enc.node_feat(i, 2) = v == end ? 1.0 : 0.0;
        if (v == current) enc.current_row = i;
        if (v == end) enc.end_row = i;
        enc.mask[i] = can_extend(path, v, inst) ? 1 : 0;
        for (int j = 0; j < m; ++j) {
            enc.edge_feat(i, j) = inst.cost(v, enc.node_ids[j]);
        }
    }
    return enc;
}

StateEncoding permute_encoding(const StateEncoding& enc, const std::vector<int>& perm) {
    const int m = enc.rows();
    if (static_cast<int>(perm.size()) != m) {
        throw std::invalid_argument("permutation length mismatch");
    }
    StateEncoding out;
    out.budget = enc.budget;
    out.node_feat.resize(m, kNodeFeatures);
    out.edge_feat.resize(m, m);
    out.node_ids.resize(m);
    out.mask.resize(m);
    for (int i = 0; i < m; ++i) {
        const int src = perm[i];
        out.node_feat.row(i) = enc.node_feat.row(src);
        out.node_ids[i] = enc.node_ids[src];
        out.mask[i] = enc.mask[src];
        if (src == enc.current_row) out.current_row = i;
        if (src == enc.end_row) out.end_row = i;
        for (int j = 0; j < m; ++j) {
            out.edge_feat(i, j) = enc.edge_feat(src, perm[j]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace detail {

double activate(Activation act, double x) {
    switch (act) {
    case Activation::Elu:
        return x > 0.0 ? x : std::expm1(x);
    case Activation::Sigmoid:
        return 1.0 / (1.0 + std::exp(-x));
    case Activation::Relu:
        return x > 0.0 ? x : 0.0;
    case Activation::Identity:
        return x;
    }
    return x;
}

double activate_grad(Activation act, double x) {
    switch (act) {
    case Activation::Elu:
        return x > 0.0 ? 1.0 : std::exp(x);
    case Activation::Sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 - s);
    }
    case Activation::Relu:
        return x > 0.0 ? 1.0 : 0.0;
    case Activation::Identity:
        return 1.0;
    }
    return 1.0;
}

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LayerNormTape* tape) {
    const Eigen::Index m = x.rows();
    const double width = static_cast<double>(x.cols());
    Matrix xhat(m, x.cols());
    Vector inv_std(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double mean = x.row(i).sum() / width;
        const auto centered = x.row(i).array() - mean;
        const double var = centered.square().sum() / width;
        inv_std(i) = 1.0 / std::sqrt(var + kLayerNormEps);
        xhat.row(i) = centered * inv_std(i);
    }
    Matrix y = ((xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array()).matrix();
    if (tape) {
        tape->xhat = std::move(xhat);
        tape->inv_std = std::move(inv_std);
    }
    return y;
}

namespace {

// Row-wise softmax over the off-diagonal entries of `logits`.
Matrix neighbor_softmax(const Matrix& logits) {
    const Eigen::Index m = logits.rows();
    Matrix alpha = Matrix::Zero(m, m);
    if (m < 2) return alpha;
    for (Eigen::Index v = 0; v < m; ++v) {
        double peak = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k != v) peak = std::max(peak, logits(v, k));
        }
        double total = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k == v) continue;
            alpha(v, k) = std::exp(logits(v, k) - peak);
            total += alpha(v, k);
        }
        alpha.row(v) /= total;
    }
    return alpha;
}

void softmax_rows_inplace(Matrix& s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double peak = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - peak).exp();
        s.row(i) /= s.row(i).sum();
    }
}

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

// Logits of one head before the LeakyReLU, plus the pieces reused by the output.
void gat_head_parts(const StateEncoding& enc, const GatHead& head, GatHeadTape& t) {
    const Matrix& w = head.weight;
    const auto a = head.attention.row(0);
    const auto self = w.leftCols(kNodeFeatures);
    const auto other = w.middleCols(kNodeFeatures, kNodeFeatures);
    const auto edge_col = w.col(2 * kNodeFeatures);
    const auto budget_col = w.col(2 * kNodeFeatures + 1);

    t.node_part = enc.node_feat * self.transpose();
    t.node_part.rowwise() += enc.budget * budget_col.transpose();
    t.neighbor_part = enc.node_feat * other.transpose();

    const Vector s_self = t.node_part * a.transpose();
    const Vector s_other = t.neighbor_part * a.transpose();
    const double s_edge = a.dot(edge_col.transpose());
    const Eigen::Index m = enc.node_feat.rows();
    t.logits_pre.resize(m, m);
    for (Eigen::Index v = 0; v < m; ++v) {
        for (Eigen::Index k = 0; k < m; ++k) {
            t.logits_pre(v, k) = s_self(v) + s_other(k) + s_edge * enc.edge_feat(v, k);
        }
    }
}

}  // namespace

Matrix gat_forward_taped(const StateEncoding& enc, const QNetworkParams& params,
                         const QNetworkConfig& cfg, GatTape* tape) {
    const Eigen::Index m = enc.node_feat.rows();
    const int heads = static_cast<int>(params.gat.size());
    Matrix pre = Matrix::Zero(m, cfg.hidden);
    std::vector<GatHeadTape> head_tapes(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        GatHeadTape& t = head_tapes[h];
        const GatHead& head = params.gat[h];
        gat_head_parts(enc, head, t);
        Matrix logits = t.logits_pre.unaryExpr([&](double x) { return leaky(x, cfg.leaky_slope); });
        t.alpha = neighbor_softmax(logits);
        t.edge_mean = (t.alpha.array() * enc.edge_feat.array()).rowwise().sum().matrix();
        if (m >= 2) {
            pre += t.node_part;
            pre.noalias() += t.alpha * t.neighbor_part;
            pre.noalias() += t.edge_mean * head.weight.col(2 * kNodeFeatures).transpose();
        }
    }
    pre /= static_cast<double>(heads);
    Matrix out = pre.unaryExpr([&](double x) { return activate(cfg.gat_activation, x); });
    if (tape) {
        tape->enc = enc;
        tape->heads = std::move(head_tapes);
        tape->pre = std::move(pre);
        tape->out = out;
    }
    return out;
}

Matrix tel_layer_forward(const Matrix& x, const TelLayer& l, const QNetworkConfig& cfg,
                         TelLayerTape* tape) {
    const Eigen::Index m = x.rows();
    const int width = cfg.hidden / cfg.tel_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(width));

    Matrix q = x * l.wq;
    q.rowwise() += l.bq.row(0);
    Matrix k = x * l.wk;
    k.rowwise() += l.bk.row(0);
    Matrix v = x * l.wv;
    v.rowwise() += l.bv.row(0);

    Matrix concat(m, cfg.hidden);
    std::vector<Matrix> attn(static_cast<std::size_t>(cfg.tel_heads));
    for (int h = 0; h < cfg.tel_heads; ++h) {
        Matrix s = (q.middleCols(h * width, width) * k.middleCols(h * width, width).transpose()) * scale;
        softmax_rows_inplace(s);
        concat.middleCols(h * width, width).noalias() = s * v.middleCols(h * width, width);
        attn[h] = std::move(s);
    }
    Matrix y = concat * l.wo;
    y.rowwise() += l.bo.row(0);

    LayerNormTape ln1;
    Matrix x1 = layer_norm(x + y, l.ln1_gain, l.ln1_bias, &ln1);

    Matrix ff_pre = x1 * l.ff1;
    ff_pre.rowwise() += l.ff1_bias.row(0);
    Matrix ff_act = ff_pre.cwiseMax(0.0);
    Matrix f2 = ff_act * l.ff2;
    f2.rowwise() += l.ff2_bias.row(0);

    LayerNormTape ln2;
    Matrix out = layer_norm(x1 + f2, l.ln2_gain, l.ln2_bias, &ln2);
    if (tape) {
        tape->input = x;
        tape->q = std::move(q);
        tape->k = std::move(k);
        tape->v = std::move(v);
        tape->attn = std::move(attn);
        tape->concat = std::move(concat);
        tape->ln1 = std::move(ln1);
        tape->x1 = std::move(x1);
        tape->ff_pre = std::move(ff_pre);
        tape->ff_act = std::move(ff_act);
        tape->ln2 = std::move(ln2);
        tape->out = out;
    }
    return out;
}

}  // namespace detail

Matrix gat_forward(const StateEncoding& enc, const QNetworkParams& params, const QNetworkConfig& cfg) {
    return detail::gat_forward_taped(enc, params, cfg, nullptr);
}

Matrix tel_forward(const Matrix& h, const QNetworkParams& params, const QNetworkConfig& cfg) {
    Matrix x = h;
    for (const auto& layer : params.tel) {
        x = detail::tel_layer_forward(x, layer, cfg, nullptr);
    }
    return x;
}

Vector project_q(const Matrix& h, const QNetworkParams& params) {
    return h * params.projection.row(0).transpose();
}

Matrix gat_attention(const StateEncoding& enc, const GatHead& head, const QNetworkConfig& cfg) {
    GatHeadTape t;
    detail::gat_head_parts(enc, head, t);
    return detail::neighbor_softmax(
        t.logits_pre.unaryExpr([&](double x) { return detail::leaky(x, cfg.leaky_slope); }));
}

Matrix tel_attention(const Matrix& h, const TelLayer& layer, int head, const QNetworkConfig& cfg) {
    TelLayerTape tape;
    detail::tel_layer_forward(h, layer, cfg, &tape);
    return tape.attn.at(static_cast<std::size_t>(head));
}

Vector forward_rows(const StateEncoding& enc, const QNetworkParams& params, const QNetworkConfig& cfg) {
    return project_q(tel_forward(gat_forward(enc, params, cfg), params, cfg), params);
}

std::vector<double> forward_q(const Instance& inst, const PathState& path,
                              const QNetworkParams& params, const QNetworkConfig& cfg) {
    std::vector<double> out(static_cast<std::size_t>(inst.size()),
                            -std::numeric_limits<double>::infinity());
    if (path.closed()) return out;
    const StateEncoding enc = encode_state(inst, path);
    const Vector q = forward_rows(enc, params, cfg);
    for (int i = 0; i < enc.rows(); ++i) {
        if (!std::isfinite(q(i))) {
            throw NetworkError("non-finite q value for node " + std::to_string(enc.node_ids[i]));
        }
        if (enc.mask[i]) out[enc.node_ids[i]] = q(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// QNetwork

QNetwork::QNetwork(QNetworkConfig cfg, QNetworkParams params, int threads)
    : cfg_(cfg), params_(std::move(params)), threads_(std::max(threads, 1)) {
    cfg_.validate();
}

std::vector<double> QNetwork::q_values(const Instance& inst, const PathState& path) const {
    return forward_q(inst, path, params_, cfg_);
}

std::vector<std::vector<double>> QNetwork::q_values_batch(const Instance& inst,
                                                          std::span<const PathState> paths) const {
    std::vector<std::vector<double>> out(paths.size());
    parallel_for(paths.size(), threads_,
                 [&](std::size_t i) { out[i] = forward_q(inst, paths[i], params_, cfg_); });
    return out;
}

}  // namespace opbeam
