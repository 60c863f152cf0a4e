#include "phrasevec/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "phrasevec/io.hpp"
#include "phrasevec/simd.hpp"

namespace phrasevec {

namespace {

constexpr char kCheckpointMagic[4] = {'P', 'V', 'E', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

void check_input_dim(const Model& model, std::uint32_t dim) {
    if (dim != model.input_dim())
        throw std::invalid_argument("input dimension " + std::to_string(dim) +
                                    " does not match model |D| = " +
                                    std::to_string(model.input_dim()));
}

}  // namespace

Model::Model(std::uint32_t m, std::uint32_t d)
    : m_(m), d_(d), enc_(std::size_t(m) * d, 0.0), dec_(std::size_t(d) * m, 0.0) {
    if (m == 0 || d == 0) throw std::invalid_argument("model dimensions must be positive");
}

bool Model::all_finite() const {
    for (double v : enc_) {
        if (!std::isfinite(v)) return false;
    }
    for (double v : dec_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::vector<double> encode(const Model& model, std::span<const std::uint32_t> ids,
                           std::span<const double> vals) {
    if (ids.size() != vals.size())
        throw std::invalid_argument("sparse input ids/vals size mismatch");
    std::vector<double> code(model.dim(), 0.0);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] >= model.input_dim())
            throw std::invalid_argument("context id out of range for model");
        const auto col = model.enc_col(ids[k]);
        simd::axpy(vals[k], col.data(), code.data(), code.size());
    }
    return code;
}

std::vector<double> encode(const Model& model, const SqrtDistribution& input) {
    check_input_dim(model, input.dim);
    return encode(model, input.ids, input.vals);
}

std::vector<double> encode_dense(const Model& model, std::span<const double> input) {
    check_input_dim(model, static_cast<std::uint32_t>(input.size()));
    std::vector<double> code(model.dim(), 0.0);
    for (std::uint32_t j = 0; j < input.size(); ++j) {
        if (input[j] != 0.0) {
            const auto col = model.enc_col(j);
            simd::axpy(input[j], col.data(), code.data(), code.size());
        }
    }
    return code;
}

std::vector<double> decode(const Model& model, std::span<const double> code) {
    if (code.size() != model.dim())
        throw std::invalid_argument("code dimension does not match model");
    std::vector<double> out(model.input_dim());
    for (std::uint32_t i = 0; i < model.input_dim(); ++i) {
        const auto row = model.dec_row(i);
        out[i] = simd::dot(row.data(), code.data(), code.size());
    }
    return out;
}

ReconGrads reconstruction_loss_and_grads(const Model& model, const SqrtDistribution& input) {
    check_input_dim(model, input.dim);
    ReconGrads g;
    g.code = encode(model, input.ids, input.vals);
    g.residual = decode(model, g.code);
    for (std::size_t k = 0; k < input.ids.size(); ++k) {
        g.residual[input.ids[k]] -= input.vals[k];
    }
    g.loss = simd::sumsq(g.residual.data(), g.residual.size());
    g.code_grad.assign(model.dim(), 0.0);
    for (std::uint32_t i = 0; i < model.input_dim(); ++i) {
        if (g.residual[i] != 0.0) {
            const auto row = model.dec_row(i);
            simd::axpy(2.0 * g.residual[i], row.data(), g.code_grad.data(), g.code_grad.size());
        }
    }
    return g;
}

std::vector<double> compose_phrase(std::span<const std::vector<double>> word_vectors) {
    if (word_vectors.empty())
        throw std::invalid_argument("compose_phrase: empty vector sequence");
    const std::size_t m = word_vectors.front().size();
    std::vector<double> mean(m, 0.0);
    for (const auto& v : word_vectors) {
        if (v.size() != m)
            throw std::invalid_argument("compose_phrase: dimension mismatch");
        simd::axpy(1.0, v.data(), mean.data(), m);
    }
    simd::scale(1.0 / static_cast<double>(word_vectors.size()), mean.data(), m);
    return mean;
}

RankingGrads ranking_loss_and_grads(std::span<const std::vector<double>> phrase_vectors,
                                    std::span<const std::vector<double>> negative_vectors) {
    if (phrase_vectors.empty())
        throw std::invalid_argument("ranking loss needs at least one phrase vector");
    if (negative_vectors.empty())
        throw std::invalid_argument("ranking loss needs a nonempty negative set");
    const std::size_t T = phrase_vectors.size();
    const std::size_t m = phrase_vectors.front().size();

    const std::vector<double> xs = compose_phrase(phrase_vectors);

    std::vector<double> pos_scores(T);
    for (std::size_t t = 0; t < T; ++t) {
        pos_scores[t] = simd::dot(xs.data(), phrase_vectors[t].data(), m);
    }
    std::vector<double> neg_scores(negative_vectors.size());
    for (std::size_t i = 0; i < negative_vectors.size(); ++i) {
        if (negative_vectors[i].size() != m)
            throw std::invalid_argument("negative vector dimension mismatch");
        neg_scores[i] = simd::dot(xs.data(), negative_vectors[i].data(), m);
    }

    RankingGrads g;
    g.phrase_grads.assign(T, std::vector<double>(m, 0.0));
    g.negative_grads.assign(negative_vectors.size(), std::vector<double>(m, 0.0));

    // Accumulated d(loss)/d(x_s); spread over phrase words with weight 1/T
    // at the end.
    std::vector<double> xs_grad(m, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < negative_vectors.size(); ++i) {
            const double margin = 1.0 - pos_scores[t] + neg_scores[i];
            if (margin <= 0.0) continue;
            g.loss += margin;
            simd::axpy(-1.0, xs.data(), g.phrase_grads[t].data(), m);
            simd::axpy(1.0, xs.data(), g.negative_grads[i].data(), m);
            simd::axpy(1.0, negative_vectors[i].data(), xs_grad.data(), m);
            simd::axpy(-1.0, phrase_vectors[t].data(), xs_grad.data(), m);
        }
    }
    const double inv_t = 1.0 / static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) {
        simd::axpy(inv_t, xs_grad.data(), g.phrase_grads[t].data(), m);
    }
    return g;
}

std::vector<std::uint32_t> sample_negatives(std::mt19937_64& rng, std::uint32_t pool_size,
                                            std::span<const std::uint32_t> excluded,
                                            std::uint32_t n) {
    std::unordered_set<std::uint32_t> taboo(excluded.begin(), excluded.end());
    if (static_cast<std::uint64_t>(n) + taboo.size() > pool_size)
        throw std::invalid_argument("cannot draw " + std::to_string(n) +
                                    " negatives from a pool of " + std::to_string(pool_size) +
                                    " with " + std::to_string(taboo.size()) + " excluded");
    // Unbiased bounded draw from the engine; std::uniform_int_distribution is
    // implementation-defined and would break cross-platform reproducibility.
    const auto draw = [&rng](std::uint32_t bound) -> std::uint32_t {
        const std::uint64_t span = bound;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        return static_cast<std::uint32_t>(r % span);
    };
    std::vector<std::uint32_t> out;
    out.reserve(n);
    while (out.size() < n) {
        const std::uint32_t cand = draw(pool_size);
        if (taboo.insert(cand).second) out.push_back(cand);
    }
    return out;
}

std::vector<double> infer_from_counts(const Model& model, const SparseVector& counts) {
    if (counts.ids.empty()) throw std::invalid_argument("infer_from_counts: empty counts");
    check_input_dim(model, counts.dim);
    double total = 0.0;
    for (double v : counts.vals) {
        if (v < 0.0) throw std::invalid_argument("infer_from_counts: negative count");
        total += v;
    }
    if (total <= 0.0) throw std::invalid_argument("infer_from_counts: zero total count");
    SparseVector prob;
    prob.dim = counts.dim;
    prob.ids = counts.ids;
    prob.vals.resize(counts.vals.size());
    for (std::size_t i = 0; i < counts.vals.size(); ++i) prob.vals[i] = counts.vals[i] / total;
    const SqrtDistribution s = sqrt_transform(prob);
    return encode(model, s);
}

void save_checkpoint(const std::string& path, const Model& model,
                     const std::string& vocab_file) {
    std::string out;
    out.reserve(16 + 8 * (std::size_t(model.dim()) * model.input_dim() * 2));
    out.append(kCheckpointMagic, 4);
    append_le_u32(out, kCheckpointVersion);
    append_le_u32(out, model.dim());
    append_le_u32(out, model.input_dim());
    for (std::uint32_t i = 0; i < model.dim(); ++i) {
        for (std::uint32_t j = 0; j < model.input_dim(); ++j) {
            append_le_f64(out, model.enc_at(i, j));
        }
    }
    for (std::uint32_t i = 0; i < model.input_dim(); ++i) {
        for (std::uint32_t j = 0; j < model.dim(); ++j) {
            append_le_f64(out, model.dec_at(i, j));
        }
    }
    atomic_write_file(path, out);
    atomic_write_file(path + ".meta", "vocab_file=" + vocab_file + "\n");
}

Model load_checkpoint(const std::string& path) {
    const std::string data = read_file(path);
    if (data.size() < 16 || std::string_view(data).substr(0, 4) != std::string_view("PVEC", 4))
        throw std::runtime_error(path + ": not a model checkpoint");
    const std::uint32_t version = read_le_u32(data, 4);
    if (version != kCheckpointVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version " +
                                 std::to_string(version));
    const std::uint32_t m = read_le_u32(data, 8);
    const std::uint32_t d = read_le_u32(data, 12);
    const std::size_t expected = 16 + 8 * (2 * std::size_t(m) * d);
    if (data.size() != expected)
        throw std::runtime_error(path + ": checkpoint size mismatch");
    Model model(m, d);
    std::size_t off = 16;
    for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = 0; j < d; ++j, off += 8) {
            model.enc_at(i, j) = read_le_f64(data, off);
        }
    }
    for (std::uint32_t i = 0; i < d; ++i) {
        for (std::uint32_t j = 0; j < m; ++j, off += 8) {
            model.dec_at(i, j) = read_le_f64(data, off);
        }
    }
    return model;
}

}  // namespace phrasevec
