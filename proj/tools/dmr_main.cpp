// Command-line front end for the DMR pipeline: data validation, synthetic
// generation, chronological splitting, implicit-network construction,
// training, evaluation, recommendation, and the neighbor-count sweep.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "dmr/checkpoint.hpp"
#include "dmr/config.hpp"
#include "dmr/future_sequence.hpp"
#include "dmr/io.hpp"
#include "dmr/metrics.hpp"
#include "dmr/model.hpp"
#include "dmr/neighbor_index.hpp"
#include "dmr/split.hpp"
#include "dmr/synthetic.hpp"
#include "dmr/trainer.hpp"

namespace fs = std::filesystem;
using namespace dmr;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

/// Flags shared by every pipeline stage; an optional --config file is applied
/// first and explicit flags override it.
struct ConfigBinder {
    RunConfig config;

    void bind_network(CLI::App* cmd) {
        cmd->add_option("--k", config.k, "query items per user");
        cmd->add_option("--g", config.g, "candidate cap (applied after ranking)");
        cmd->add_option("--tau", config.tau, "mapped-similarity threshold");
        cmd->add_option("--n-max", config.n_max, "neighbors kept per user");
        cmd->add_option("--similarity", config.similarity, "pcc or overlap");
        cmd->add_option("--future-cap", config.future_cap, "future entries per neighbor");
    }
    void bind_model(CLI::App* cmd) {
        cmd->add_option("--dim", config.dim, "embedding dimension");
        cmd->add_option("--trends", config.trends, "trend groups per half");
        cmd->add_option("--time-power", config.time_power, "time-decay exponent");
        cmd->add_option("--time-scale", config.time_scale, "time-decay scale (0 = data span)");
        cmd->add_option("--neg-weight", config.neg_weight, "negative-trend score weight");
    }
    void bind_training(CLI::App* cmd) {
        cmd->add_option("--learning-rate", config.learning_rate, "adam learning rate");
        cmd->add_option("--batch-size", config.batch_size, "samples per adam step");
        cmd->add_option("--l2-reg", config.l2_reg, "l2 regularization factor");
        cmd->add_option("--epochs", config.epochs, "training epochs");
        cmd->add_option("--adam-beta1", config.adam_beta1, "adam beta1");
        cmd->add_option("--adam-beta2", config.adam_beta2, "adam beta2");
        cmd->add_option("--adam-eps", config.adam_eps, "adam epsilon");
        cmd->add_option("--neg-sample-ratio", config.neg_sample_ratio,
                        "sampled negatives per positive");
    }
    void bind_eval(CLI::App* cmd) {
        cmd->add_option("--eval-n", config.eval_n, "ranking cutoff N");
        cmd->add_option("--candidate-pool", config.candidate_pool,
                        "sampled unobserved candidates per user");
    }
    void bind_seed(CLI::App* cmd) { cmd->add_option("--seed", config.seed, "top-level seed"); }
};

double resolve_time_scale(const RunConfig& config, const InteractionLog& train) {
    if (config.time_scale > 0.0) return config.time_scale;
    const auto [lo, hi] = train.time_range();
    return std::max<double>(1.0, static_cast<double>(hi - lo));
}

ChronoSplit load_split(const std::string& train_path, const std::string& test_path) {
    return split_from_logs(ingest_log(train_path), ingest_log(test_path));
}

std::unordered_map<ItemId, std::int32_t> categories_of(const ChronoSplit& split) {
    auto categories = split.train.category_map();
    for (const auto& [item, cat] : split.test.category_map()) categories.emplace(item, cat);
    return categories;
}

std::string eval_row(const std::string& setting, const EvalReport& report,
                     const std::vector<UserEval>& per_user,
                     const std::unordered_map<ItemId, std::int32_t>& categories) {
    auto diversity_at = [&](std::size_t n) -> std::string {
        double sum = 0.0;
        std::size_t users = 0;
        try {
            for (const auto& ue : per_user) {
                if (ue.relevant.empty() || ue.ranked.items.empty()) continue;
                sum += diversity_at_n(ue.ranked, categories, n);
                ++users;
            }
        } catch (const DataError&) {
            return "nan";
        }
        return users == 0 ? "nan" : g17(sum / static_cast<double>(users));
    };
    std::string row = setting;
    row += '\t';
    row += std::to_string(report.n);
    row += '\t';
    row += std::to_string(report.users_evaluated);
    row += '\t';
    row += g17(report.precision);
    row += '\t';
    row += g17(report.recall);
    row += '\t';
    row += g17(report.f1);
    row += '\t';
    row += g17(report.auc);
    row += '\t';
    row += diversity_at(10);
    row += '\t';
    row += diversity_at(50);
    row += '\t';
    row += diversity_at(100);
    return row;
}

const char* kEvalHeader =
    "setting\tn\tusers\tprecision\trecall\tf1\tauc\tdiversity@10\tdiversity@50\tdiversity@100";

std::string trace_table(const std::vector<EpochStats>& trace) {
    std::string out = "epoch\tmean_loss\tval_auc\tsamples\n";
    for (const auto& row : trace) {
        out += std::to_string(row.epoch);
        out += '\t';
        out += g17(row.mean_loss);
        out += '\t';
        out += std::isnan(row.val_auc) ? "nan" : g17(row.val_auc);
        out += '\t';
        out += std::to_string(row.samples);
        out += '\n';
    }
    return out;
}

int cmd_validate(const std::string& log_path, char delimiter) {
    IngestReport report = validate_log(log_path, {delimiter}, 10);
    std::cout << "users\t" << report.n_users << "\nitems\t" << report.n_items
              << "\ninteractions\t" << report.n_interactions << "\nviolations\t"
              << report.violations.size() << (report.violations.size() >= 10 ? "+" : "") << "\n";
    for (const auto& v : report.violations) {
        std::cout << "line " << v.line << ": " << v.message << "\n";
    }
    return report.ok() ? 0 : 3;
}

struct SynthArgs {
    PlantedWorld world;
    double concentration = 0.9;
    std::string out;
    std::string truth_out;
};

int cmd_synth(SynthArgs& args) {
    PlantedWorld world = PlantedWorld::defaults(args.world.n_users, args.world.n_items,
                                                args.world.n_categories,
                                                args.world.trends_per_user, args.world.seed,
                                                args.concentration);
    world.interactions_per_user = args.world.interactions_per_user;
    world.drift_prob = args.world.drift_prob;
    world.click_noise = args.world.click_noise;
    world.click_rate = args.world.click_rate;

    SyntheticData data = generate(world);
    write_log(data.log, args.out);
    if (!args.truth_out.empty()) write_ground_truth(data.truth, args.truth_out);
    std::cout << "users\t" << data.log.user_count() << "\ninteractions\t"
              << data.log.interaction_count() << "\nlog\t" << args.out << "\n";
    return 0;
}

int cmd_split(const std::string& log_path, double fraction, const std::string& train_out,
              const std::string& test_out) {
    InteractionLog log = ingest_log(log_path);
    ChronoSplit split = chrono_split(log, fraction);
    write_log(split.train, train_out);
    write_log(split.test, test_out);
    std::cout << "train_users\t" << split.train.user_count() << "\ntest_users\t"
              << split.test.user_count() << "\ndropped_users\t" << split.dropped_users
              << "\ntrain_interactions\t" << split.train.interaction_count()
              << "\ntest_interactions\t" << split.test.interaction_count() << "\n";
    return 0;
}

int cmd_build_network(const RunConfig& config, const std::string& train_path,
                      const std::string& out_path) {
    InteractionLog train = ingest_log(train_path);
    NeighborIndex index = build_neighbor_index(train, config.neighbor_params());
    save_neighbor_index(index, out_path);
    std::size_t edges = 0;
    for (const auto& [user, list] : index.lists) edges += list.size();
    std::cout << "users\t" << index.lists.size() << "\nedges\t" << edges << "\nnetwork\t"
              << out_path << "\n";
    return 0;
}

struct TrainArgs {
    std::string train_path, test_path, network_path, out_dir, resume_path;
};

int cmd_train(RunConfig& config, const TrainArgs& args) {
    config.validate();
    InteractionLog test;
    if (!args.test_path.empty()) test = ingest_log(args.test_path);
    ChronoSplit split = split_from_logs(ingest_log(args.train_path), std::move(test));
    NeighborIndex index = load_neighbor_index(args.network_path);

    config.time_scale = resolve_time_scale(config, split.train);
    fs::create_directories(args.out_dir);
    const std::string resolved = config.serialize();
    write_text_file(args.out_dir + "/config.resolved", resolved);

    Checkpoint ckpt;
    std::size_t start_epoch = 0;
    if (!args.resume_path.empty()) {
        ckpt = load_checkpoint(args.resume_path);
        if (!ckpt.has_adam) throw DataError("resume checkpoint lacks optimizer state");
        if (ckpt.params.dim != config.dim || ckpt.params.trends != config.trends) {
            throw DataError("resume checkpoint shape does not match the configuration");
        }
        start_epoch = static_cast<std::size_t>(ckpt.completed_epochs);
    } else {
        ckpt.params = ModelParams::init(split.train.item_universe(),
                                        config.model_config(config.time_scale), config.seed);
        ckpt.adam = AdamState::zeros_like(ckpt.params);
    }

    const EvalOptions eval_opts = config.eval_options();
    const bool validate = split.test.user_count() > 0;
    TrainResult result = train(split, index, ckpt.params, ckpt.adam, config.train_config(),
                               start_epoch, validate ? &eval_opts : nullptr);

    ckpt.has_adam = true;
    ckpt.completed_epochs = config.epochs;
    save_checkpoint(ckpt, args.out_dir + "/checkpoint.bin", config.hash());

    const std::string trace = trace_table(result.trace);
    write_text_file(args.out_dir + "/trace.tsv", trace);
    std::cout << trace;
    return 0;
}

struct EvalArgs {
    std::string checkpoint_path, train_path, test_path, network_path, out_path, setting;
};

int cmd_evaluate(const RunConfig& config, const EvalArgs& args) {
    Checkpoint ckpt = load_checkpoint(args.checkpoint_path);
    ChronoSplit split = load_split(args.train_path, args.test_path);
    NeighborIndex index = load_neighbor_index(args.network_path);

    EvalDetail detail =
        evaluate(ckpt.params, split, index, config.eval_options(), config.future_cap);
    const std::string setting =
        args.setting.empty() ? "n_max=" + std::to_string(index.params.n_max) : args.setting;
    std::string table = std::string(kEvalHeader) + "\n" +
                        eval_row(setting, detail.report, detail.per_user, categories_of(split)) +
                        "\n";
    std::cout << table;
    if (!args.out_path.empty()) {
        write_text_file(args.out_path, table);
        write_text_file(args.out_path + ".config", config.serialize());
    }
    return 0;
}

struct RecommendArgs {
    std::string checkpoint_path, train_path, network_path;
    UserId user = 0;
    std::size_t top = 10;
};

int cmd_recommend(const RunConfig& config, const RecommendArgs& args) {
    Checkpoint ckpt = load_checkpoint(args.checkpoint_path);
    const ModelParams& params = ckpt.params;
    InteractionLog train = ingest_log(args.train_path);
    NeighborIndex index = load_neighbor_index(args.network_path);

    const UserHistory& hist = train.at(args.user);
    FutureSequence future = extract_future_sequence(args.user, index, train, config.future_cap);
    UserSequences seqs = build_user_sequences(hist, future, params);
    if (!seqs.has_positive()) throw DataError("user has no positive history to recommend from");

    const TrendGroup pos_hist = route_trends(seqs.pos_history, params);
    const TrendGroup pos_fut = route_trends(seqs.pos_future, params);
    TrendGroup neg_hist, neg_fut;
    const bool has_neg = seqs.has_negative();
    if (has_neg) {
        neg_hist = route_trends(seqs.neg_history, params);
        neg_fut = route_trends(seqs.neg_future, params);
    }
    const double query_time = static_cast<double>(hist.interactions.back().timestamp);
    const UserRepresentation pos = build_user_representation(pos_hist, pos_fut, query_time, params);
    UserRepresentation neg;
    if (has_neg) neg = build_user_representation(neg_hist, neg_fut, query_time, params);

    std::unordered_set<ItemId> seen;
    for (const auto& x : hist.interactions) seen.insert(x.item);

    std::vector<std::pair<double, ItemId>> scored;
    for (std::size_t i = 0; i < params.vocab.size(); ++i) {
        if (seen.count(params.vocab[i]) > 0) continue;
        const double z =
            score_item(pos, params.item_embeddings.row(i), has_neg ? &neg : nullptr, params);
        scored.emplace_back(z, params.vocab[i]);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::cout << "rank\titem\tprobability\n";
    const std::size_t top = std::min(args.top, scored.size());
    for (std::size_t i = 0; i < top; ++i) {
        std::cout << (i + 1) << '\t' << scored[i].second << '\t' << g17(sigmoid(scored[i].first))
                  << '\n';
    }
    return 0;
}

struct SweepArgs {
    std::string log_path, out_dir;
    std::vector<std::size_t> neighbor_counts = {5, 20, 50};
};

int cmd_sweep(RunConfig& config, const SweepArgs& args) {
    config.validate();
    InteractionLog log = ingest_log(args.log_path);
    ChronoSplit split = chrono_split(log, config.split_fraction);
    config.time_scale = resolve_time_scale(config, split.train);

    fs::create_directories(args.out_dir);
    write_text_file(args.out_dir + "/config.resolved", config.serialize());

    const auto categories = categories_of(split);
    std::string table = std::string(kEvalHeader) + "\n";
    for (std::size_t n_max : args.neighbor_counts) {
        RunConfig run = config;
        run.n_max = n_max;
        run.g = std::max(run.g, n_max);
        NeighborIndex index = build_neighbor_index(split.train, run.neighbor_params());

        ModelParams params = ModelParams::init(split.train.item_universe(),
                                               run.model_config(run.time_scale), run.seed);
        AdamState adam = AdamState::zeros_like(params);
        train(split, index, params, adam, run.train_config());

        EvalDetail detail = evaluate(params, split, index, run.eval_options(), run.future_cap);
        table += eval_row("n_max=" + std::to_string(n_max), detail.report, detail.per_user,
                          categories);
        table += '\n';
    }
    std::cout << table;
    write_text_file(args.out_dir + "/sweep.tsv", table);
    return 0;
}

// Applies --config before CLI11 parses explicit flags, so flags win.
RunConfig preload_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string_view(argv[i]) == "--config") return RunConfig::load(argv[i + 1]);
    }
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg(argv[i]);
        if (arg.rfind("--config=", 0) == 0) return RunConfig::load(std::string(arg.substr(9)));
    }
    return RunConfig{};
}

int run(int argc, char** argv) {
    CLI::App app{"DMR micro-video recommender pipeline"};
    app.require_subcommand(1);

    ConfigBinder binder;
    binder.config = preload_config(argc, argv);
    std::string config_path;  // consumed by preload_config; registered so CLI11 accepts it
    auto accept_config = [&config_path](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
    };

    auto* validate_cmd = app.add_subcommand("validate", "check an interaction log");
    std::string log_path;
    std::string delimiter = ",";
    validate_cmd->add_option("--log", log_path, "interaction log")->required();
    validate_cmd->add_option("--delimiter", delimiter, "field delimiter (default ,)");

    auto* synth_cmd = app.add_subcommand("synth", "generate a planted-trend log");
    SynthArgs synth_args;
    synth_cmd->add_option("--out", synth_args.out, "output log path")->required();
    synth_cmd->add_option("--truth-out", synth_args.truth_out, "ground-truth sidecar path");
    synth_cmd->add_option("--users", synth_args.world.n_users, "user count");
    synth_cmd->add_option("--items", synth_args.world.n_items, "item count");
    synth_cmd->add_option("--categories", synth_args.world.n_categories, "category count");
    synth_cmd->add_option("--trends-per-user", synth_args.world.trends_per_user,
                          "latent trends per user");
    synth_cmd->add_option("--interactions-per-user", synth_args.world.interactions_per_user,
                          "events per user");
    synth_cmd->add_option("--drift", synth_args.world.drift_prob, "trend switch probability");
    synth_cmd->add_option("--click-noise", synth_args.world.click_noise,
                          "chance a click ignores the affinity");
    synth_cmd->add_option("--click-rate", synth_args.world.click_rate, "chance an event clicks");
    synth_cmd->add_option("--concentration", synth_args.concentration,
                          "affinity mass on the archetype's own category");
    synth_cmd->add_option("--seed", synth_args.world.seed, "generator seed");

    auto* split_cmd = app.add_subcommand("split", "chronological train/test split");
    std::string split_log, train_out, test_out;
    double fraction = 0.8;
    split_cmd->add_option("--log", split_log, "interaction log")->required();
    split_cmd->add_option("--fraction", fraction, "train fraction in (0,1)");
    split_cmd->add_option("--train-out", train_out, "train log output")->required();
    split_cmd->add_option("--test-out", test_out, "test log output")->required();

    auto* network_cmd = app.add_subcommand("build-network", "build the implicit user network");
    std::string network_train, network_out;
    network_cmd->add_option("--train", network_train, "train log")->required();
    network_cmd->add_option("--out", network_out, "neighbor index output")->required();
    binder.bind_network(network_cmd);
    accept_config(network_cmd);

    auto* train_cmd = app.add_subcommand("train", "train the model");
    TrainArgs train_args;
    train_cmd->add_option("--train", train_args.train_path, "train log")->required();
    train_cmd->add_option("--test", train_args.test_path, "test log (enables validation)");
    train_cmd->add_option("--network", train_args.network_path, "neighbor index")->required();
    train_cmd->add_option("--out-dir", train_args.out_dir, "output directory")->required();
    train_cmd->add_option("--resume", train_args.resume_path, "checkpoint to resume from");
    binder.bind_network(train_cmd);
    binder.bind_model(train_cmd);
    binder.bind_training(train_cmd);
    binder.bind_eval(train_cmd);
    binder.bind_seed(train_cmd);
    accept_config(train_cmd);

    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint");
    EvalArgs eval_args;
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint_path, "model checkpoint")->required();
    eval_cmd->add_option("--train", eval_args.train_path, "train log")->required();
    eval_cmd->add_option("--test", eval_args.test_path, "test log")->required();
    eval_cmd->add_option("--network", eval_args.network_path, "neighbor index")->required();
    eval_cmd->add_option("--out", eval_args.out_path, "also write the table here");
    eval_cmd->add_option("--setting", eval_args.setting, "row label (default n_max=...)");
    eval_cmd->add_option("--future-cap", binder.config.future_cap, "future entries per neighbor");
    binder.bind_eval(eval_cmd);
    binder.bind_seed(eval_cmd);
    accept_config(eval_cmd);

    auto* recommend_cmd = app.add_subcommand("recommend", "top-N items for one user");
    RecommendArgs rec_args;
    recommend_cmd->add_option("--checkpoint", rec_args.checkpoint_path, "model checkpoint")
        ->required();
    recommend_cmd->add_option("--train", rec_args.train_path, "train log")->required();
    recommend_cmd->add_option("--network", rec_args.network_path, "neighbor index")->required();
    recommend_cmd->add_option("--user", rec_args.user, "user id")->required();
    recommend_cmd->add_option("--top", rec_args.top, "list length");
    recommend_cmd->add_option("--future-cap", binder.config.future_cap,
                              "future entries per neighbor");

    auto* sweep_cmd = app.add_subcommand("sweep", "train/evaluate across neighbor counts");
    SweepArgs sweep_args;
    sweep_cmd->add_option("--log", sweep_args.log_path, "full interaction log")->required();
    sweep_cmd->add_option("--out-dir", sweep_args.out_dir, "output directory")->required();
    sweep_cmd->add_option("--neighbors", sweep_args.neighbor_counts,
                          "neighbor counts to sweep (default 5 20 50)");
    binder.bind_network(sweep_cmd);
    binder.bind_model(sweep_cmd);
    binder.bind_training(sweep_cmd);
    binder.bind_eval(sweep_cmd);
    binder.bind_seed(sweep_cmd);
    accept_config(sweep_cmd);
    sweep_cmd->add_option("--fraction", binder.config.split_fraction, "train fraction");

    if (argc <= 1) {
        std::cerr << app.help();
        std::cerr << "dmr: usage-error: a subcommand is required\n";
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "dmr: usage-error: " << e.what() << "\n";
        return 2;
    }

    if (validate_cmd->parsed()) return cmd_validate(log_path, delimiter.empty() ? ',' : delimiter[0]);
    if (synth_cmd->parsed()) return cmd_synth(synth_args);
    if (split_cmd->parsed()) return cmd_split(split_log, fraction, train_out, test_out);
    if (network_cmd->parsed()) return cmd_build_network(binder.config, network_train, network_out);
    if (train_cmd->parsed()) return cmd_train(binder.config, train_args);
    if (eval_cmd->parsed()) return cmd_evaluate(binder.config, eval_args);
    if (recommend_cmd->parsed()) return cmd_recommend(binder.config, rec_args);
    if (sweep_cmd->parsed()) return cmd_sweep(binder.config, sweep_args);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "dmr: usage-error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "dmr: numeric-error: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "dmr: data-error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "dmr: error: " << e.what() << "\n";
        return 3;
    }
}
