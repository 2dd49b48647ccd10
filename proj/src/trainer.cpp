#include "dmr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "dmr/future_sequence.hpp"
#include "dmr/rng.hpp"

namespace dmr {

void TrainConfig::validate() const {
    adam().validate();
    if (batch_size < 1) throw UsageError("batch size must be >= 1");
    if (l2_reg < 0.0) throw UsageError("l2 regularization must be >= 0");
}

namespace {

void check_no_leakage(const UserHistory& hist, const FutureSequence& future,
                      const ChronoSplit& split) {
    auto boundary_of = [&](UserId user) {
        auto it = split.train_boundary.find(user);
        if (it == split.train_boundary.end()) {
            throw DataError("train boundary missing for user " + std::to_string(user));
        }
        return it->second;
    };
    const Timestamp own_boundary = boundary_of(hist.user);
    for (const auto& x : hist.interactions) {
        if (x.timestamp > own_boundary) {
            throw DataError("leakage: training sequence of user " + std::to_string(hist.user) +
                            " crosses its split boundary");
        }
    }
    for (const auto& e : future.entries) {
        if (e.timestamp > boundary_of(e.source)) {
            throw DataError("leakage: future sequence entry from neighbor " +
                            std::to_string(e.source) + " crosses that neighbor's split boundary");
        }
    }
}

std::vector<TrainSample> assemble_samples(const UserHistory& hist, const ModelParams& params,
                                          std::size_t neg_ratio, Rng& sample_rng) {
    std::unordered_set<std::size_t> interacted;
    for (const auto& x : hist.interactions) {
        if (auto idx = params.index_of(x.item)) interacted.insert(*idx);
    }

    std::vector<TrainSample> samples;
    const std::size_t vocab_size = params.vocab.size();
    for (const auto& x : hist.interactions) {
        auto idx = params.index_of(x.item);
        if (!idx) continue;
        const double ts = static_cast<double>(x.timestamp);
        samples.push_back({*idx, x.click, ts});
        if (!x.click || neg_ratio == 0 || interacted.size() >= vocab_size) continue;
        for (std::size_t i = 0; i < neg_ratio; ++i) {
            std::size_t draw = 0;
            do {
                draw = static_cast<std::size_t>(sample_rng.next_below(vocab_size));
            } while (interacted.count(draw) > 0);
            samples.push_back({draw, false, ts});
        }
    }
    return samples;
}

}  // namespace

TrainResult train(const ChronoSplit& split, const NeighborIndex& index, ModelParams& params,
                  AdamState& adam, const TrainConfig& config, std::size_t start_epoch,
                  const EvalOptions* validation) {
    config.validate();
    TrainResult result;

    std::vector<UserId> user_ids;
    user_ids.reserve(split.train.user_count());
    for (const auto& u : split.train.users()) user_ids.push_back(u.user);

    ModelGrads grads = ModelGrads::zeros_like(params);

    for (std::size_t epoch = start_epoch; epoch < config.epochs; ++epoch) {
        std::vector<UserId> order = user_ids;
        Rng shuffle_rng = substream(config.seed, "shuffle", epoch);
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_below(i));
            std::swap(order[i - 1], order[j]);
        }

        double epoch_bce = 0.0;
        std::size_t epoch_samples = 0;
        result.users_trained = 0;
        result.users_skipped = 0;

        for (UserId user : order) {
            const UserHistory& hist = split.train.at(user);
            if (!index.contains(user)) {
                ++result.users_skipped;
                continue;
            }
            FutureSequence future =
                extract_future_sequence(user, index, split.train, config.future_cap);
            check_no_leakage(hist, future, split);

            UserSequences seqs = build_user_sequences(hist, future, params);
            if (!seqs.has_positive()) {
                ++result.users_skipped;
                continue;
            }
            Rng sample_rng = substream(config.seed, "sampling.train", epoch,
                                       static_cast<std::uint64_t>(user));
            const std::vector<TrainSample> samples =
                assemble_samples(hist, params, config.neg_sample_ratio, sample_rng);
            if (samples.empty()) {
                ++result.users_skipped;
                continue;
            }
            ++result.users_trained;

            for (std::size_t begin = 0; begin < samples.size(); begin += config.batch_size) {
                const std::size_t end = std::min(begin + config.batch_size, samples.size());
                grads.zero();
                const BatchResult batch =
                    run_batch(seqs, std::span(samples).subspan(begin, end - begin), params,
                              config.l2_reg, &grads);
                epoch_bce += batch.bce;
                epoch_samples += batch.samples;
                adam_step(params, grads, adam, config.adam());
            }
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.samples = epoch_samples;
        stats.mean_loss = epoch_samples > 0 ? epoch_bce / static_cast<double>(epoch_samples) : 0.0;
        stats.val_auc = std::numeric_limits<double>::quiet_NaN();
        if (validation != nullptr) {
            stats.val_auc =
                evaluate(params, split, index, *validation, config.future_cap).report.auc;
        }
        result.trace.push_back(stats);
    }
    return result;
}

}  // namespace dmr
