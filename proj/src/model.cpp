#include "dmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmr/rng.hpp"

namespace dmr {

void ModelConfig::validate() const {
    if (dim < 1) throw UsageError("embedding dimension must be >= 1");
    if (trends < 1) throw UsageError("trend count must be >= 1");
    if (!(time_scale > 0.0)) throw UsageError("time scale must be > 0");
    if (!(time_power > 0.0)) throw UsageError("time power must be > 0");
    if (neg_weight < 0.0) throw UsageError("negative-trend weight must be >= 0");
}

namespace {

void fill_uniform(Mat& m, double scale, Rng& rng) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.next_uniform(-scale, scale);
    }
}

}  // namespace

ModelParams ModelParams::init(std::vector<ItemId> vocab, const ModelConfig& config,
                              std::uint64_t seed) {
    config.validate();
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

    ModelParams p;
    p.dim = config.dim;
    p.trends = config.trends;
    p.time_power = config.time_power;
    p.time_scale = config.time_scale;
    p.neg_weight = config.neg_weight;
    p.vocab = std::move(vocab);
    p.rebuild_vocab_index();

    const double d_scale = 1.0 / std::sqrt(static_cast<double>(config.dim));
    Rng init_rng = substream(seed, "init");
    p.item_embeddings = Mat(p.vocab.size(), config.dim);
    fill_uniform(p.item_embeddings, d_scale, init_rng);
    p.trend_init = Mat(config.trends, config.dim);
    fill_uniform(p.trend_init, d_scale, init_rng);
    p.coattention = Mat(config.dim, config.dim);
    fill_uniform(p.coattention, d_scale, init_rng);
    p.fusion_projection = Mat(2 * config.dim, config.dim);
    fill_uniform(p.fusion_projection, 1.0 / std::sqrt(2.0 * static_cast<double>(config.dim)),
                 init_rng);
    return p;
}

void ModelParams::rebuild_vocab_index() {
    vocab_index_.clear();
    vocab_index_.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) vocab_index_.emplace(vocab[i], i);
}

std::optional<std::size_t> ModelParams::index_of(ItemId item) const {
    auto it = vocab_index_.find(item);
    if (it == vocab_index_.end()) return std::nullopt;
    return it->second;
}

void ModelParams::check_finite() const {
    if (!item_embeddings.all_finite()) throw NumericError("non-finite values in item_embeddings");
    if (!trend_init.all_finite()) throw NumericError("non-finite values in trend_init");
    if (!coattention.all_finite()) throw NumericError("non-finite values in coattention");
    if (!fusion_projection.all_finite()) throw NumericError("non-finite values in fusion_projection");
}

bool ModelParams::operator==(const ModelParams& other) const {
    return dim == other.dim && trends == other.trends && time_power == other.time_power &&
           time_scale == other.time_scale && neg_weight == other.neg_weight &&
           vocab == other.vocab && item_embeddings == other.item_embeddings &&
           trend_init == other.trend_init && coattention == other.coattention &&
           fusion_projection == other.fusion_projection;
}

bool TrendGroup::any_active() const {
    return std::any_of(active.begin(), active.end(), [](bool a) { return a; });
}

TrendGroup route_trends(const std::vector<SequenceItem>& seq, const ModelParams& params) {
    const std::size_t s = params.trends;
    const std::size_t d = params.dim;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    TrendGroup group;
    group.seq_len = seq.size();
    group.rows = params.trend_init;  // additive update starts from the shared rows
    group.mean_time.assign(s, 0.0);
    group.active.assign(s, false);
    group.weights = Mat(seq.size(), s);
    group.total_weight.assign(s, 0.0);
    group.weighted_time.assign(s, 0.0);

    for (std::size_t m = 0; m < seq.size(); ++m) {
        if (seq[m].item_index >= params.item_embeddings.rows()) {
            throw UsageError("sequence item index out of range");
        }
        const auto x = params.item_embeddings.row(seq[m].item_index);

        // Stage 1: bilinear logits x . C t_j / sqrt(d), softmax over trends.
        std::vector<double> cx(d, 0.0);  // C^T x
        for (std::size_t r = 0; r < d; ++r) {
            const double xr = x[r];
            if (xr == 0.0) continue;
            const auto crow = params.coattention.row(r);
            for (std::size_t c = 0; c < d; ++c) cx[c] += xr * crow[c];
        }
        double max_logit = -std::numeric_limits<double>::infinity();
        std::vector<double> logits(s);
        for (std::size_t j = 0; j < s; ++j) {
            logits[j] = dot(cx, params.trend_init.row(j)) * inv_sqrt_d;
            max_logit = std::max(max_logit, logits[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            logits[j] = std::exp(logits[j] - max_logit);
            denom += logits[j];
        }
        for (std::size_t j = 0; j < s; ++j) {
            const double w = logits[j] / denom;
            group.weights(m, j) = w;
            group.total_weight[j] += w;
            group.weighted_time[j] += w * seq[m].timestamp;
        }
    }

    // Stage 2: additive row update with each trend's assigned mass.
    for (std::size_t j = 0; j < s; ++j) {
        if (group.total_weight[j] < kTrendWeightFloor) continue;
        group.active[j] = true;
        group.mean_time[j] = group.weighted_time[j] / group.total_weight[j];
        auto row = group.rows.row(j);
        for (std::size_t m = 0; m < seq.size(); ++m) {
            const double w = group.weights(m, j);
            const auto x = params.item_embeddings.row(seq[m].item_index);
            for (std::size_t c = 0; c < d; ++c) row[c] += w * x[c];
        }
    }
    return group;
}

std::vector<double> item_level_attention(const std::vector<SequenceItem>& seq,
                                         std::span<const double> weights,
                                         const ModelParams& params) {
    std::vector<double> out(params.dim, 0.0);
    double total = 0.0;
    for (std::size_t m = 0; m < seq.size(); ++m) {
        const double w = weights[m];
        if (w < 0.0) throw UsageError("item-level attention weights must be nonnegative");
        total += w;
        const auto x = params.item_embeddings.row(seq[m].item_index);
        for (std::size_t c = 0; c < params.dim; ++c) out[c] += w * x[c];
    }
    const double denom = std::max(total, kTrendWeightFloor);
    for (double& v : out) v /= denom;
    return out;
}

std::vector<double> trend_time_attention(const TrendGroup& group, double query_time,
                                         const ModelParams& params,
                                         TimeAttentionDetail* detail) {
    if (!(params.time_scale > 0.0)) throw UsageError("time scale must be > 0");
    const std::size_t s = group.rows.rows();
    const std::size_t d = group.rows.cols();
    std::vector<double> out(d, 0.0);
    std::vector<double> weights(s, 0.0);

    if (!group.any_active()) {
        // Nothing routed: every row passes through, so the output is the
        // plain sum pool of the rows.
        for (std::size_t j = 0; j < s; ++j) {
            weights[j] = 1.0;
            const auto row = group.rows.row(j);
            for (std::size_t c = 0; c < d; ++c) out[c] += row[c];
        }
        if (detail != nullptr) {
            detail->weights = std::move(weights);
            detail->fallback = true;
        }
        return out;
    }

    double max_logit = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(s, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < s; ++j) {
        if (!group.active[j]) continue;
        const double dt = std::abs(query_time - group.mean_time[j]) / params.time_scale;
        logits[j] = -std::pow(dt, params.time_power);
        max_logit = std::max(max_logit, logits[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        if (!group.active[j]) continue;
        logits[j] = std::exp(logits[j] - max_logit);
        denom += logits[j];
    }
    for (std::size_t j = 0; j < s; ++j) {
        if (!group.active[j]) continue;
        weights[j] = logits[j] / denom;
        const auto row = group.rows.row(j);
        for (std::size_t c = 0; c < d; ++c) out[c] += weights[j] * row[c];
    }
    if (detail != nullptr) {
        detail->weights = std::move(weights);
        detail->fallback = false;
    }
    return out;
}

UserRepresentation build_user_representation(const TrendGroup& history, const TrendGroup& future,
                                             double query_time, const ModelParams& params) {
    UserRepresentation rep;
    rep.history_vec = trend_time_attention(history, query_time, params);
    rep.future_vec = trend_time_attention(future, query_time, params);

    const std::size_t d = params.dim;
    rep.fused.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            acc += rep.history_vec[r] * params.fusion_projection(r, c);
            acc += rep.future_vec[r] * params.fusion_projection(d + r, c);
        }
        rep.fused[c] = acc;
    }
    return rep;
}

UserRepresentation build_user_representation(const std::vector<SequenceItem>& history,
                                             const std::vector<SequenceItem>& future,
                                             double query_time, const ModelParams& params) {
    if (history.empty() && future.empty()) {
        throw UsageError("cannot build a representation from two empty sequences");
    }
    return build_user_representation(route_trends(history, params), route_trends(future, params),
                                     query_time, params);
}

double score_item(const UserRepresentation& positive, std::span<const double> item_embedding,
                  const UserRepresentation* negative, const ModelParams& params) {
    double logit = dot(positive.fused, item_embedding);
    if (negative != nullptr) {
        logit -= params.neg_weight * dot(negative->fused, item_embedding);
    }
    return logit;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> candidate_softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size(), 0.0);
    if (logits.empty()) return out;
    double max_logit = logits[0];
    for (double z : logits) max_logit = std::max(max_logit, z);
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

UserSequences build_user_sequences(const UserHistory& history, const FutureSequence& future,
                                   const ModelParams& params) {
    UserSequences seqs;
    for (const auto& x : history.interactions) {
        auto idx = params.index_of(x.item);
        if (!idx) continue;  // item outside the training vocabulary
        SequenceItem si{*idx, static_cast<double>(x.timestamp)};
        (x.click ? seqs.pos_history : seqs.neg_history).push_back(si);
    }
    for (const auto& e : future.entries) {
        auto idx = params.index_of(e.item);
        if (!idx) continue;
        SequenceItem si{*idx, static_cast<double>(e.timestamp)};
        (e.click ? seqs.pos_future : seqs.neg_future).push_back(si);
    }
    return seqs;
}

}  // namespace dmr
