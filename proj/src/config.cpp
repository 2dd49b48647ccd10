#include "dmr/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dmr {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' has a bad numeric value '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw UsageError("config key '" + key + "' has a bad integer value '" + value + "'");
    }
    return v;
}

}  // namespace

void RunConfig::validate() const {
    neighbor_params().validate();
    if (dim < 1) throw UsageError("dim must be >= 1");
    if (trends < 1) throw UsageError("trends must be >= 1");
    if (!(time_power > 0.0)) throw UsageError("time-power must be > 0");
    if (time_scale < 0.0) throw UsageError("time-scale must be >= 0 (0 = auto)");
    if (neg_weight < 0.0) throw UsageError("neg-weight must be >= 0");
    train_config().validate();
    if (eval_n < 1) throw UsageError("eval-n must be >= 1");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        throw UsageError("split-fraction must be in (0, 1)");
    }
    similarity_kind_from_name(similarity);
}

NeighborParams RunConfig::neighbor_params() const {
    NeighborParams p;
    p.k = k;
    p.g = g;
    p.tau = tau;
    p.n_max = n_max;
    p.similarity = similarity_kind_from_name(similarity);
    return p;
}

ModelConfig RunConfig::model_config(double resolved_time_scale) const {
    ModelConfig c;
    c.dim = dim;
    c.trends = trends;
    c.time_power = time_power;
    c.time_scale = resolved_time_scale;
    c.neg_weight = neg_weight;
    return c;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig c;
    c.learning_rate = learning_rate;
    c.batch_size = batch_size;
    c.l2_reg = l2_reg;
    c.epochs = epochs;
    c.seed = seed;
    c.adam_beta1 = adam_beta1;
    c.adam_beta2 = adam_beta2;
    c.adam_eps = adam_eps;
    c.neg_sample_ratio = neg_sample_ratio;
    c.future_cap = future_cap;
    return c;
}

EvalOptions RunConfig::eval_options() const {
    EvalOptions o;
    o.n = eval_n;
    o.candidate_pool = candidate_pool;
    o.seed = seed;
    return o;
}

namespace {

// One table drives serialization, parsing, and unknown-key rejection.
struct Field {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
    auto u64_field = [](std::size_t RunConfig::*member) {
        return std::pair{
            std::function<std::string(const RunConfig&)>(
                [member](const RunConfig& c) { return std::to_string(c.*member); }),
            std::function<void(RunConfig&, const std::string&)>(
                [member](RunConfig& c, const std::string& v) {
                    c.*member = static_cast<std::size_t>(parse_u64("", v));
                })};
    };
    auto dbl_field = [](double RunConfig::*member) {
        return std::pair{
            std::function<std::string(const RunConfig&)>(
                [member](const RunConfig& c) { return format_double(c.*member); }),
            std::function<void(RunConfig&, const std::string&)>(
                [member](RunConfig& c, const std::string& v) { c.*member = parse_double("", v); })};
    };
    static const std::vector<Field> table = [&] {
        std::vector<Field> t;
        auto add_u64 = [&](const char* key, std::size_t RunConfig::*member) {
            auto [get, set] = u64_field(member);
            t.push_back({key, get, set});
        };
        auto add_dbl = [&](const char* key, double RunConfig::*member) {
            auto [get, set] = dbl_field(member);
            t.push_back({key, get, set});
        };
        add_u64("k", &RunConfig::k);
        add_u64("g", &RunConfig::g);
        add_dbl("tau", &RunConfig::tau);
        add_u64("n-max", &RunConfig::n_max);
        t.push_back({"similarity",
                     [](const RunConfig& c) { return c.similarity; },
                     [](RunConfig& c, const std::string& v) { c.similarity = v; }});
        add_u64("future-cap", &RunConfig::future_cap);
        add_u64("dim", &RunConfig::dim);
        add_u64("trends", &RunConfig::trends);
        add_dbl("time-power", &RunConfig::time_power);
        add_dbl("time-scale", &RunConfig::time_scale);
        add_dbl("neg-weight", &RunConfig::neg_weight);
        add_dbl("learning-rate", &RunConfig::learning_rate);
        add_u64("batch-size", &RunConfig::batch_size);
        add_dbl("l2-reg", &RunConfig::l2_reg);
        add_u64("epochs", &RunConfig::epochs);
        add_dbl("adam-beta1", &RunConfig::adam_beta1);
        add_dbl("adam-beta2", &RunConfig::adam_beta2);
        add_dbl("adam-eps", &RunConfig::adam_eps);
        add_u64("neg-sample-ratio", &RunConfig::neg_sample_ratio);
        add_u64("eval-n", &RunConfig::eval_n);
        add_u64("candidate-pool", &RunConfig::candidate_pool);
        add_dbl("split-fraction", &RunConfig::split_fraction);
        t.push_back({"seed",
                     [](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); }});
        return t;
    }();
    return table;
}

}  // namespace

std::string RunConfig::serialize() const {
    std::map<std::string, std::string> kv;
    for (const auto& f : fields()) kv[f.key] = f.get(*this);
    std::string out;
    for (const auto& [key, value] : kv) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

RunConfig RunConfig::parse_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + " is not key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        bool matched = false;
        for (const auto& f : fields()) {
            if (key == f.key) {
                try {
                    f.set(config, value);
                } catch (const UsageError&) {
                    throw UsageError("config key '" + key + "' has a bad value '" + value + "'");
                }
                matched = true;
                break;
            }
        }
        if (!matched) throw UsageError("unknown config key '" + key + "'");
    }
    return config;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::string RunConfig::hash() const {
    const std::string text = serialize();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dmr
