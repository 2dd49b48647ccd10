#include "dmr/gradients.hpp"

#include <cmath>

namespace dmr {

ModelGrads ModelGrads::zeros_like(const ModelParams& params) {
    ModelGrads g;
    g.item_embeddings = Mat(params.item_embeddings.rows(), params.item_embeddings.cols());
    g.trend_init = Mat(params.trend_init.rows(), params.trend_init.cols());
    g.coattention = Mat(params.coattention.rows(), params.coattention.cols());
    g.fusion_projection = Mat(params.fusion_projection.rows(), params.fusion_projection.cols());
    return g;
}

void ModelGrads::zero() {
    item_embeddings.fill(0.0);
    trend_init.fill(0.0);
    coattention.fill(0.0);
    fusion_projection.fill(0.0);
}

void ModelGrads::check_finite() const {
    if (!item_embeddings.all_finite()) throw NumericError("non-finite gradient: item_embeddings");
    if (!trend_init.all_finite()) throw NumericError("non-finite gradient: trend_init");
    if (!coattention.all_finite()) throw NumericError("non-finite gradient: coattention");
    if (!fusion_projection.all_finite()) throw NumericError("non-finite gradient: fusion_projection");
}

double bce_loss(std::span<const std::pair<double, int>> samples) {
    double loss = 0.0;
    for (const auto& [z, y] : samples) {
        loss += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
    }
    return loss;
}

double l2_penalty(const ModelParams& params) {
    return params.item_embeddings.squared_norm() + params.trend_init.squared_norm() +
           params.coattention.squared_norm() + params.fusion_projection.squared_norm();
}

namespace {

/// Per-half gradient accumulators flowing back from the per-sample stages
/// into the (once per batch) routing backward.
struct HalfGrads {
    Mat rows;                       // d(loss)/d(t'_j)
    std::vector<double> mean_time;  // d(loss)/d(mean_time_j)

    explicit HalfGrads(const ModelParams& params)
        : rows(params.trends, params.dim), mean_time(params.trends, 0.0) {}
};

/// Backward through the time attention of one half for one sample.
void attention_backward(const TrendGroup& group, const TimeAttentionDetail& detail,
                        std::span<const double> d_out, double query_time,
                        const ModelParams& params, HalfGrads& acc) {
    const std::size_t s = params.trends;
    const std::size_t d = params.dim;

    if (detail.fallback) {
        for (std::size_t j = 0; j < s; ++j) {
            auto dst = acc.rows.row(j);
            for (std::size_t c = 0; c < d; ++c) dst[c] += d_out[c];
        }
        return;
    }

    std::vector<double> d_alpha(s, 0.0);
    double weighted_sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        if (!group.active[j]) continue;
        const double alpha = detail.weights[j];
        auto dst = acc.rows.row(j);
        const auto row = group.rows.row(j);
        for (std::size_t c = 0; c < d; ++c) dst[c] += alpha * d_out[c];
        d_alpha[j] = dot(row, d_out);
        weighted_sum += alpha * d_alpha[j];
    }
    for (std::size_t j = 0; j < s; ++j) {
        if (!group.active[j]) continue;
        const double d_logit = detail.weights[j] * (d_alpha[j] - weighted_sum);
        const double delta = query_time - group.mean_time[j];
        const double u = std::abs(delta) / params.time_scale;
        const double sign = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
        const double du = params.time_power * std::pow(u, params.time_power - 1.0);
        acc.mean_time[j] += d_logit * sign * du / params.time_scale;
    }
}

/// Backward through route_trends for one half, given the accumulated
/// gradients of the updated rows and mean times.
void routing_backward(const std::vector<SequenceItem>& seq, const TrendGroup& group,
                      const HalfGrads& acc, const ModelParams& params, ModelGrads& grads) {
    const std::size_t s = params.trends;
    const std::size_t d = params.dim;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    // t'_j = t0_j + sum_m w_mj x_m, so the row gradient feeds trend_init
    // directly; inactive trends stop there.
    for (std::size_t j = 0; j < s; ++j) {
        auto dst = grads.trend_init.row(j);
        const auto src = acc.rows.row(j);
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    if (seq.empty()) return;

    std::vector<double> d_weighted_time(s, 0.0);  // dP_j
    std::vector<double> d_total_weight(s, 0.0);   // dS_j
    for (std::size_t j = 0; j < s; ++j) {
        if (!group.active[j] || acc.mean_time[j] == 0.0) continue;
        const double S = group.total_weight[j];
        d_weighted_time[j] = acc.mean_time[j] / S;
        d_total_weight[j] = -acc.mean_time[j] * group.weighted_time[j] / (S * S);
    }

    Mat g_assign(s, d);  // g_j = sum_m d_logit_mj x_m
    for (std::size_t m = 0; m < seq.size(); ++m) {
        const auto x = params.item_embeddings.row(seq[m].item_index);
        const double ts = seq[m].timestamp;

        std::vector<double> d_w(s, 0.0);
        for (std::size_t j = 0; j < s; ++j) {
            if (!group.active[j]) continue;
            d_w[j] = dot(x, acc.rows.row(j)) + ts * d_weighted_time[j] + d_total_weight[j];
        }
        double mixed = 0.0;
        for (std::size_t j = 0; j < s; ++j) mixed += group.weights(m, j) * d_w[j];

        // Softmax backward, then the bilinear logit x . C t0_j / sqrt(d).
        std::vector<double> v(d, 0.0);  // sum_j d_logit_mj t0_j
        for (std::size_t j = 0; j < s; ++j) {
            const double d_logit = group.weights(m, j) * (d_w[j] - mixed);
            if (d_logit == 0.0) continue;
            const auto t0 = params.trend_init.row(j);
            auto gj = g_assign.row(j);
            for (std::size_t c = 0; c < d; ++c) {
                v[c] += d_logit * t0[c];
                gj[c] += d_logit * x[c];
            }
        }

        auto dx = grads.item_embeddings.row(seq[m].item_index);
        for (std::size_t r = 0; r < d; ++r) {
            // dC += x v^T / sqrt(d); dx += C v / sqrt(d)
            const auto crow = params.coattention.row(r);
            auto dcrow = grads.coattention.row(r);
            double acc_dx = 0.0;
            const double xr = x[r] * inv_sqrt_d;
            for (std::size_t c = 0; c < d; ++c) {
                dcrow[c] += xr * v[c];
                acc_dx += crow[c] * v[c];
            }
            dx[r] += acc_dx * inv_sqrt_d;
            // direct path through the stage-2 sum: dx += sum_j w_mj dRows_j
            double acc_direct = 0.0;
            for (std::size_t j = 0; j < s; ++j) {
                if (!group.active[j]) continue;
                acc_direct += group.weights(m, j) * acc.rows(j, r);
            }
            dx[r] += acc_direct;
        }
    }

    // dT0_j += C^T g_j / sqrt(d)
    for (std::size_t j = 0; j < s; ++j) {
        const auto gj = g_assign.row(j);
        auto dst = grads.trend_init.row(j);
        for (std::size_t r = 0; r < d; ++r) {
            const double gr = gj[r] * inv_sqrt_d;
            if (gr == 0.0) continue;
            const auto crow = params.coattention.row(r);
            for (std::size_t c = 0; c < d; ++c) dst[c] += gr * crow[c];
        }
    }
}

void add_scaled(Mat& dst, const Mat& src, double scale) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += scale * src.data()[i];
}

}  // namespace

BatchResult run_batch(const UserSequences& seqs, std::span<const TrainSample> samples,
                      const ModelParams& params, double l2_reg, ModelGrads* grads) {
    BatchResult result;
    result.samples = samples.size();
    if (l2_reg > 0.0) result.reg_term = l2_reg * l2_penalty(params);
    if (!seqs.has_positive()) {
        throw UsageError("cannot score a user with no positive history and no positive future");
    }

    const std::size_t d = params.dim;
    const bool has_neg = seqs.has_negative();

    const TrendGroup pos_hist = route_trends(seqs.pos_history, params);
    const TrendGroup pos_fut = route_trends(seqs.pos_future, params);
    TrendGroup neg_hist, neg_fut;
    if (has_neg) {
        neg_hist = route_trends(seqs.neg_history, params);
        neg_fut = route_trends(seqs.neg_future, params);
    }

    HalfGrads d_pos_hist(params), d_pos_fut(params), d_neg_hist(params), d_neg_fut(params);

    for (const TrainSample& sample : samples) {
        TimeAttentionDetail att_ph, att_pf, att_nh, att_nf;
        UserRepresentation pos;
        pos.history_vec = trend_time_attention(pos_hist, sample.query_time, params, &att_ph);
        pos.future_vec = trend_time_attention(pos_fut, sample.query_time, params, &att_pf);
        UserRepresentation neg;
        if (has_neg) {
            neg.history_vec = trend_time_attention(neg_hist, sample.query_time, params, &att_nh);
            neg.future_vec = trend_time_attention(neg_fut, sample.query_time, params, &att_nf);
        }

        auto fuse = [&](UserRepresentation& rep) {
            rep.fused.assign(d, 0.0);
            for (std::size_t c = 0; c < d; ++c) {
                double acc = 0.0;
                for (std::size_t r = 0; r < d; ++r) {
                    acc += rep.history_vec[r] * params.fusion_projection(r, c);
                    acc += rep.future_vec[r] * params.fusion_projection(d + r, c);
                }
                rep.fused[c] = acc;
            }
        };
        fuse(pos);
        if (has_neg) fuse(neg);

        const auto e_i = params.item_embeddings.row(sample.item_index);
        const double z = score_item(pos, e_i, has_neg ? &neg : nullptr, params);
        if (!std::isfinite(z)) throw NumericError("non-finite logit in batch forward");
        const double y = sample.label ? 1.0 : 0.0;
        result.bce += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));

        if (grads == nullptr) continue;

        const double dz = sigmoid(z) - y;
        auto de_i = grads->item_embeddings.row(sample.item_index);
        std::vector<double> d_fused_pos(d), d_fused_neg(d);
        for (std::size_t c = 0; c < d; ++c) {
            double upstream = pos.fused[c];
            if (has_neg) upstream -= params.neg_weight * neg.fused[c];
            de_i[c] += dz * upstream;
            d_fused_pos[c] = dz * e_i[c];
            if (has_neg) d_fused_neg[c] = -params.neg_weight * dz * e_i[c];
        }

        auto fuse_backward = [&](const UserRepresentation& rep, std::span<const double> d_fused,
                                 std::vector<double>& de_h, std::vector<double>& de_f) {
            de_h.assign(d, 0.0);
            de_f.assign(d, 0.0);
            for (std::size_t r = 0; r < d; ++r) {
                auto w_h = grads->fusion_projection.row(r);
                auto w_f = grads->fusion_projection.row(d + r);
                const auto p_h = params.fusion_projection.row(r);
                const auto p_f = params.fusion_projection.row(d + r);
                double acc_h = 0.0, acc_f = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double df = d_fused[c];
                    w_h[c] += rep.history_vec[r] * df;
                    w_f[c] += rep.future_vec[r] * df;
                    acc_h += p_h[c] * df;
                    acc_f += p_f[c] * df;
                }
                de_h[r] = acc_h;
                de_f[r] = acc_f;
            }
        };

        std::vector<double> de_h, de_f;
        fuse_backward(pos, d_fused_pos, de_h, de_f);
        attention_backward(pos_hist, att_ph, de_h, sample.query_time, params, d_pos_hist);
        attention_backward(pos_fut, att_pf, de_f, sample.query_time, params, d_pos_fut);
        if (has_neg) {
            fuse_backward(neg, d_fused_neg, de_h, de_f);
            attention_backward(neg_hist, att_nh, de_h, sample.query_time, params, d_neg_hist);
            attention_backward(neg_fut, att_nf, de_f, sample.query_time, params, d_neg_fut);
        }
    }

    if (grads != nullptr) {
        routing_backward(seqs.pos_history, pos_hist, d_pos_hist, params, *grads);
        routing_backward(seqs.pos_future, pos_fut, d_pos_fut, params, *grads);
        if (has_neg) {
            routing_backward(seqs.neg_history, neg_hist, d_neg_hist, params, *grads);
            routing_backward(seqs.neg_future, neg_fut, d_neg_fut, params, *grads);
        }
        if (l2_reg > 0.0) {
            add_scaled(grads->item_embeddings, params.item_embeddings, 2.0 * l2_reg);
            add_scaled(grads->trend_init, params.trend_init, 2.0 * l2_reg);
            add_scaled(grads->coattention, params.coattention, 2.0 * l2_reg);
            add_scaled(grads->fusion_projection, params.fusion_projection, 2.0 * l2_reg);
        }
        grads->check_finite();
    }
    return result;
}

}  // namespace dmr
