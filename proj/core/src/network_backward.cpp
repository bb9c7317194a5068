#include <cmath>
#include <string>

#include "network_tape.hpp"

namespace opbeam {

namespace {

// Column sums as a 1 x cols row.
Matrix col_sum(const Matrix& x) { return x.colwise().sum(); }

Matrix layer_norm_backward(const Matrix& dy, const LayerNormTape& t, const Matrix& gain,
                           Matrix& dgain, Matrix& dbias) {
    dgain += col_sum(dy.cwiseProduct(t.xhat));
    dbias += col_sum(dy);
    const Matrix dxhat = (dy.array().rowwise() * gain.row(0).array()).matrix();
    const double width = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double sum = dxhat.row(i).sum();
        const double dot = dxhat.row(i).dot(t.xhat.row(i));
        dx.row(i) = (t.inv_std(i) / width) *
                    (width * dxhat.row(i).array() - sum - t.xhat.row(i).array() * dot);
    }
    return dx;
}

// Softmax backward for row-normalised weights `p` given upstream `dp`.
Matrix softmax_backward(const Matrix& p, const Matrix& dp) {
    Matrix ds = p.cwiseProduct(dp);
    const Vector inner = ds.rowwise().sum();
    ds -= (p.array().colwise() * inner.array()).matrix();
    return ds;
}

Matrix tel_layer_backward(const Matrix& dout, const TelLayerTape& t, const TelLayer& l,
                          const QNetworkConfig& cfg, TelLayer& g) {
    // out = LN2(x1 + ff(x1))
    const Matrix dr2 = layer_norm_backward(dout, t.ln2, l.ln2_gain, g.ln2_gain, g.ln2_bias);
    g.ff2.noalias() += t.ff_act.transpose() * dr2;
    g.ff2_bias += col_sum(dr2);
    Matrix dff = dr2 * l.ff2.transpose();
    dff = dff.cwiseProduct((t.ff_pre.array() > 0.0).cast<double>().matrix());
    g.ff1.noalias() += t.x1.transpose() * dff;
    g.ff1_bias += col_sum(dff);
    Matrix dx1 = dr2;
    dx1.noalias() += dff * l.ff1.transpose();

    // x1 = LN1(x + mha(x))
    const Matrix dr1 = layer_norm_backward(dx1, t.ln1, l.ln1_gain, g.ln1_gain, g.ln1_bias);
    g.wo.noalias() += t.concat.transpose() * dr1;
    g.bo += col_sum(dr1);
    const Matrix dconcat = dr1 * l.wo.transpose();

    const int width = cfg.hidden / cfg.tel_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(width));
    const Eigen::Index m = t.input.rows();
    Matrix dq(m, cfg.hidden), dk(m, cfg.hidden), dv(m, cfg.hidden);
    for (int h = 0; h < cfg.tel_heads; ++h) {
        const Matrix& a = t.attn[h];
        const auto dslice = dconcat.middleCols(h * width, width);
        const Matrix da = dslice * t.v.middleCols(h * width, width).transpose();
        dv.middleCols(h * width, width).noalias() = a.transpose() * dslice;
        const Matrix ds = softmax_backward(a, da) * scale;
        dq.middleCols(h * width, width).noalias() = ds * t.k.middleCols(h * width, width);
        dk.middleCols(h * width, width).noalias() = ds.transpose() * t.q.middleCols(h * width, width);
    }
    g.wq.noalias() += t.input.transpose() * dq;
    g.bq += col_sum(dq);
    g.wk.noalias() += t.input.transpose() * dk;
    g.bk += col_sum(dk);
    g.wv.noalias() += t.input.transpose() * dv;
    g.bv += col_sum(dv);

    Matrix dx = dr1;
    dx.noalias() += dq * l.wq.transpose();
    dx.noalias() += dk * l.wk.transpose();
    dx.noalias() += dv * l.wv.transpose();
    return dx;
}

void gat_backward(const Matrix& dout, const GatTape& t, const QNetworkParams& params,
                  const QNetworkConfig& cfg, QNetworkParams& grad) {
    const StateEncoding& enc = t.enc;
    const Eigen::Index m = enc.node_feat.rows();
    if (m < 2) return;  // output does not depend on any parameter
    const int heads = static_cast<int>(params.gat.size());
    Matrix dpre = t.pre.unaryExpr([&](double x) { return detail::activate_grad(cfg.gat_activation, x); });
    dpre = dpre.cwiseProduct(dout) / static_cast<double>(heads);

    for (int h = 0; h < heads; ++h) {
        const GatHeadTape& ht = t.heads[h];
        const GatHead& head = params.gat[h];
        GatHead& gh = grad.gat[h];
        const auto a = head.attention.row(0);
        const auto edge_col = head.weight.col(2 * kNodeFeatures);

        // out_v = sum_k alpha_vk (P_v + Q_k + c u_vk)
        Matrix dnode = dpre;
        Matrix dneighbor = ht.alpha.transpose() * dpre;
        RowVector dedge_col = ht.edge_mean.transpose() * dpre;

        // d alpha_vk = dout_v . (Q_k + c u_vk); the P_v term cancels in the softmax.
        const Vector dout_c = dpre * edge_col;
        Matrix dalpha = dpre * ht.neighbor_part.transpose();
        dalpha += (enc.edge_feat.array().colwise() * dout_c.array()).matrix();
        Matrix dlogit = softmax_backward(ht.alpha, dalpha);
        for (Eigen::Index v = 0; v < m; ++v) {
            for (Eigen::Index k = 0; k < m; ++k) {
                if (k == v) {
                    dlogit(v, k) = 0.0;
                } else if (ht.logits_pre(v, k) <= 0.0) {
                    dlogit(v, k) *= cfg.leaky_slope;
                }
            }
        }
        // logit_pre_vk = a . P_v + a . Q_k + (a . c) u_vk
        const Vector row_sum = dlogit.rowwise().sum();
        const Vector col_sums = dlogit.colwise().sum().transpose();
        const double edge_sum = dlogit.cwiseProduct(enc.edge_feat).sum();

        gh.attention.row(0) += row_sum.transpose() * ht.node_part;
        gh.attention.row(0) += col_sums.transpose() * ht.neighbor_part;
        gh.attention.row(0) += edge_sum * edge_col.transpose();
        dnode.noalias() += row_sum * a;
        dneighbor.noalias() += col_sums * a;
        dedge_col += edge_sum * a;

        // P = X A^T + g d^T, Q = X B^T
        gh.weight.leftCols(kNodeFeatures).noalias() += dnode.transpose() * enc.node_feat;
        gh.weight.middleCols(kNodeFeatures, kNodeFeatures).noalias() += dneighbor.transpose() * enc.node_feat;
        gh.weight.col(2 * kNodeFeatures) += dedge_col.transpose();
        gh.weight.col(2 * kNodeFeatures + 1) += enc.budget * dnode.colwise().sum().transpose();
    }
}

}  // namespace

Differentiator::Differentiator(const QNetworkParams& params, const QNetworkConfig& cfg)
    : params_(&params), cfg_(&cfg), tape_(std::make_unique<ForwardTape>()) {}

Differentiator::~Differentiator() = default;
Differentiator::Differentiator(Differentiator&&) noexcept = default;
Differentiator& Differentiator::operator=(Differentiator&&) noexcept = default;

const Vector& Differentiator::forward(const StateEncoding& enc) {
    ForwardTape& t = *tape_;
    Matrix x = detail::gat_forward_taped(enc, *params_, *cfg_, &t.gat);
    t.tel.resize(params_->tel.size());
    for (std::size_t i = 0; i < params_->tel.size(); ++i) {
        x = detail::tel_layer_forward(x, params_->tel[i], *cfg_, &t.tel[i]);
    }
    t.q = project_q(x, *params_);
    if (!t.q.allFinite()) {
        throw NetworkError("non-finite value in forward output q");
    }
    return t.q;
}

void Differentiator::backward(const Vector& dq, QNetworkParams& grad) const {
    const ForwardTape& t = *tape_;
    const Matrix& final_h = t.tel.empty() ? t.gat.out : t.tel.back().out;
    // q = H' U^T
    grad.projection.row(0) += dq.transpose() * final_h;
    Matrix dh = dq * params_->projection.row(0);
    for (std::size_t i = t.tel.size(); i-- > 0;) {
        dh = tel_layer_backward(dh, t.tel[i], params_->tel[i], *cfg_, grad.tel[i]);
        if (!dh.allFinite()) {
            throw NetworkError("non-finite gradient flowing out of tel." + std::to_string(i));
        }
    }
    gat_backward(dh, t.gat, *params_, *cfg_, grad);
}

}  // namespace opbeam
