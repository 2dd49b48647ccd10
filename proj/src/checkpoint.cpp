#include "dmr/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace dmr {

namespace {

constexpr char kMagic[8] = {'D', 'M', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kEndianTag = 0x01020304;

void put_bytes(std::string& out, const void* src, std::size_t n) {
    out.append(static_cast<const char*>(src), n);
}

template <typename T>
void put(std::string& out, T value) {
    put_bytes(out, &value, sizeof(T));
}

void put_mat(std::string& out, const Mat& m) {
    put_bytes(out, m.data(), m.size() * sizeof(double));
}

struct Reader {
    const std::string& bytes;
    std::size_t pos = 0;

    void get_bytes(void* dst, std::size_t n) {
        if (pos + n > bytes.size()) throw DataError("truncated checkpoint body");
        std::memcpy(dst, bytes.data() + pos, n);
        pos += n;
    }

    template <typename T>
    T get() {
        T value;
        get_bytes(&value, sizeof(T));
        return value;
    }

    void get_mat(Mat& m, std::size_t rows, std::size_t cols) {
        m = Mat(rows, cols);
        get_bytes(m.data(), m.size() * sizeof(double));
    }
};

std::size_t expected_size(std::size_t vocab, std::size_t d, std::size_t s, bool has_adam) {
    const std::size_t tensor_doubles = vocab * d + s * d + d * d + 2 * d * d;
    std::size_t n = sizeof(kMagic) + 2 * sizeof(std::uint32_t);  // magic, version, endian
    n += 2 * sizeof(std::uint32_t);                              // d, s
    n += 3 * sizeof(double);                                     // rho, tau_time, lambda
    n += 2 * sizeof(std::uint64_t);                              // vocab size, completed epochs
    n += vocab * sizeof(std::int64_t);                           // vocab ids
    n += tensor_doubles * sizeof(double);                        // parameters
    n += 1;                                                      // has_adam flag
    if (has_adam) {
        n += sizeof(std::uint64_t);                              // step
        n += 2 * tensor_doubles * sizeof(double);                // moments
    }
    return n;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path,
                     const std::string& config_hash) {
    const ModelParams& p = ckpt.params;
    std::string out;
    out.reserve(expected_size(p.vocab.size(), p.dim, p.trends, ckpt.has_adam));

    put_bytes(out, kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, kEndianTag);
    put(out, static_cast<std::uint32_t>(p.dim));
    put(out, static_cast<std::uint32_t>(p.trends));
    put(out, p.time_power);
    put(out, p.time_scale);
    put(out, p.neg_weight);
    put(out, static_cast<std::uint64_t>(p.vocab.size()));
    put(out, ckpt.completed_epochs);
    put_bytes(out, p.vocab.data(), p.vocab.size() * sizeof(std::int64_t));
    put_mat(out, p.item_embeddings);
    put_mat(out, p.trend_init);
    put_mat(out, p.coattention);
    put_mat(out, p.fusion_projection);
    put(out, static_cast<std::uint8_t>(ckpt.has_adam ? 1 : 0));
    if (ckpt.has_adam) {
        put(out, ckpt.adam.step);
        put_mat(out, ckpt.adam.m_item_embeddings);
        put_mat(out, ckpt.adam.v_item_embeddings);
        put_mat(out, ckpt.adam.m_trend_init);
        put_mat(out, ckpt.adam.v_trend_init);
        put_mat(out, ckpt.adam.m_coattention);
        put_mat(out, ckpt.adam.v_coattention);
        put_mat(out, ckpt.adam.m_fusion_projection);
        put_mat(out, ckpt.adam.v_fusion_projection);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write file: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);

    std::ofstream manifest(path + ".manifest", std::ios::binary | std::ios::trunc);
    if (!manifest) throw DataError("cannot write file: " + path + ".manifest");
    manifest << "version=" << kVersion << '\n'
             << "config_hash=" << config_hash << '\n'
             << "dim=" << p.dim << '\n'
             << "trends=" << p.trends << '\n'
             << "vocab=" << p.vocab.size() << '\n'
             << "completed_epochs=" << ckpt.completed_epochs << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader in{bytes};

    char magic[8];
    in.get_bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a checkpoint file: " + path);
    }
    const auto version = in.get<std::uint32_t>();
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto endian = in.get<std::uint32_t>();
    if (endian != kEndianTag) throw DataError("checkpoint byte order mismatch");

    Checkpoint ckpt;
    ModelParams& p = ckpt.params;
    p.dim = in.get<std::uint32_t>();
    p.trends = in.get<std::uint32_t>();
    p.time_power = in.get<double>();
    p.time_scale = in.get<double>();
    p.neg_weight = in.get<double>();
    const auto vocab_size = in.get<std::uint64_t>();
    ckpt.completed_epochs = in.get<std::uint64_t>();

    // Validate the advertised length before reading the bulk payload.
    const std::size_t body_probe = expected_size(vocab_size, p.dim, p.trends, false);
    if (bytes.size() != body_probe &&
        bytes.size() != expected_size(vocab_size, p.dim, p.trends, true)) {
        throw DataError("checkpoint " + path + " has " + std::to_string(bytes.size()) +
                        " bytes, expected " + std::to_string(body_probe) + " (plain) or " +
                        std::to_string(expected_size(vocab_size, p.dim, p.trends, true)) +
                        " (with optimizer state)");
    }

    p.vocab.resize(vocab_size);
    in.get_bytes(p.vocab.data(), vocab_size * sizeof(std::int64_t));
    p.rebuild_vocab_index();
    in.get_mat(p.item_embeddings, vocab_size, p.dim);
    in.get_mat(p.trend_init, p.trends, p.dim);
    in.get_mat(p.coattention, p.dim, p.dim);
    in.get_mat(p.fusion_projection, 2 * p.dim, p.dim);

    ckpt.has_adam = in.get<std::uint8_t>() != 0;
    if (ckpt.has_adam) {
        if (bytes.size() != expected_size(vocab_size, p.dim, p.trends, true)) {
            throw DataError("checkpoint optimizer state truncated: " + path);
        }
        ckpt.adam.step = in.get<std::uint64_t>();
        in.get_mat(ckpt.adam.m_item_embeddings, vocab_size, p.dim);
        in.get_mat(ckpt.adam.v_item_embeddings, vocab_size, p.dim);
        in.get_mat(ckpt.adam.m_trend_init, p.trends, p.dim);
        in.get_mat(ckpt.adam.v_trend_init, p.trends, p.dim);
        in.get_mat(ckpt.adam.m_coattention, p.dim, p.dim);
        in.get_mat(ckpt.adam.v_coattention, p.dim, p.dim);
        in.get_mat(ckpt.adam.m_fusion_projection, 2 * p.dim, p.dim);
        in.get_mat(ckpt.adam.v_fusion_projection, 2 * p.dim, p.dim);
    }
    return ckpt;
}

}  // namespace dmr
