#pragma once

// Linear autoencoder over square-root context distributions. The encoder
// maps a |D|-dimensional sqrt distribution to an m-dimensional word vector,
// the decoder maps it back; neither has a bias and there is no nonlinearity.
// On top of the codes sit additive phrase composition, the margin ranking
// loss that trains words to sum, and inference of representations for
// unseen words or phrases straight from context counts.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "phrasevec/cooc.hpp"

namespace phrasevec {

class Model {
public:
    Model() = default;
    Model(std::uint32_t m, std::uint32_t d);

    std::uint32_t dim() const { return m_; }
    std::uint32_t input_dim() const { return d_; }

    // Encoder column for context id j (length m): the per-word weight slice
    // the sparse paths touch. Stored column-major for that reason.
    std::span<double> enc_col(std::uint32_t j) { return {enc_.data() + std::size_t(j) * m_, m_}; }
    std::span<const double> enc_col(std::uint32_t j) const {
        return {enc_.data() + std::size_t(j) * m_, m_};
    }
    // Decoder row for output id i (length m).
    std::span<double> dec_row(std::uint32_t i) { return {dec_.data() + std::size_t(i) * m_, m_}; }
    std::span<const double> dec_row(std::uint32_t i) const {
        return {dec_.data() + std::size_t(i) * m_, m_};
    }

    double enc_at(std::uint32_t row, std::uint32_t col) const {
        return enc_[std::size_t(col) * m_ + row];
    }
    double& enc_at(std::uint32_t row, std::uint32_t col) {
        return enc_[std::size_t(col) * m_ + row];
    }
    double dec_at(std::uint32_t row, std::uint32_t col) const {
        return dec_[std::size_t(row) * m_ + col];
    }
    double& dec_at(std::uint32_t row, std::uint32_t col) {
        return dec_[std::size_t(row) * m_ + col];
    }

    bool all_finite() const;

private:
    std::uint32_t m_ = 0;
    std::uint32_t d_ = 0;
    std::vector<double> enc_;  // column-major m x |D|
    std::vector<double> dec_;  // row-major |D| x m
};

// x = f(sqrt(P_w)); cost is support size times m.
std::vector<double> encode(const Model& model, const SqrtDistribution& input);
std::vector<double> encode(const Model& model, std::span<const std::uint32_t> ids,
                           std::span<const double> vals);
std::vector<double> encode_dense(const Model& model, std::span<const double> input);

// Reconstruction g(x); dense over all |D| outputs.
std::vector<double> decode(const Model& model, std::span<const double> code);

// Loss ||g(f(v)) - v||^2 (no 1/2, no averaging) and its exact gradients in
// rank-one factored form:
//   d(loss)/d(decoder) = 2 * residual * code^T
//   d(loss)/d(encoder) = code_grad * v^T   (nonzero only on v's support)
// with residual = g(f(v)) - v and code_grad = 2 * G^T residual.
struct ReconGrads {
    double loss = 0.0;
    std::vector<double> code;       // m
    std::vector<double> residual;   // |D|
    std::vector<double> code_grad;  // m
};

ReconGrads reconstruction_loss_and_grads(const Model& model, const SqrtDistribution& input);

// Arithmetic mean of the word vectors.
std::vector<double> compose_phrase(std::span<const std::vector<double>> word_vectors);

// Hinge ranking loss over a phrase's composed vector against negatives:
//   sum_t sum_i max(0, 1 - x_s.x_t + x_s.x_i),  x_s = mean of phrase vectors.
// Subgradients flow through x_s as well as through the direct score terms;
// the kink (margin exactly zero) is treated as inactive.
struct RankingGrads {
    double loss = 0.0;
    std::vector<std::vector<double>> phrase_grads;    // one per phrase vector
    std::vector<std::vector<double>> negative_grads;  // one per negative vector
};

RankingGrads ranking_loss_and_grads(std::span<const std::vector<double>> phrase_vectors,
                                    std::span<const std::vector<double>> negative_vectors);

// N distinct uniform draws from [0, pool_size) excluding `excluded`.
// Deterministic given the rng state.
std::vector<std::uint32_t> sample_negatives(std::mt19937_64& rng, std::uint32_t pool_size,
                                            std::span<const std::uint32_t> excluded,
                                            std::uint32_t n);

// Counts -> distribution -> sqrt -> encode. Invariant under positive
// scaling of the counts.
std::vector<double> infer_from_counts(const Model& model, const SparseVector& counts);

// Checkpoint: "PVEC" magic, u32 version, u32 m, u32 |D|, then the encoder
// (row-major m x |D|) and decoder (row-major |D| x m) as little-endian
// 64-bit floats. A sidecar <path>.meta names the vocabulary it was trained
// against.
void save_checkpoint(const std::string& path, const Model& model,
                     const std::string& vocab_file);
Model load_checkpoint(const std::string& path);

}  // namespace phrasevec
