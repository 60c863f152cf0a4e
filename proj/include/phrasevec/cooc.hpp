#pragma once

// Symmetric-window co-occurrence counting over the context dictionary,
// per-word multinomial context distributions, the square-root transform
// that makes them unit L2 vectors, and the Hellinger distance.
//
// Windows never cross document boundaries (one input file = one document).
// Out-of-vocabulary tokens occupy window positions but are neither centers
// nor contexts.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "phrasevec/corpus.hpp"

namespace phrasevec {

struct SparseVector {
    std::vector<std::uint32_t> ids;
    std::vector<double> vals;
    std::uint32_t dim = 0;

    std::size_t nnz() const { return ids.size(); }
};

// Element-wise square root of a context distribution; unit L2 norm by
// construction since the underlying probabilities sum to 1.
struct SqrtDistribution {
    std::vector<std::uint32_t> ids;
    std::vector<double> vals;
    std::uint32_t dim = 0;

    std::size_t nnz() const { return ids.size(); }
    double l2_norm() const;
};

// CSR over |W| rows and |D| context columns; all stored counts are > 0.
struct CoocMatrix {
    std::uint32_t num_rows = 0;
    std::uint32_t num_cols = 0;
    std::uint32_t window = 0;
    std::vector<std::uint64_t> row_ptr;   // num_rows + 1
    std::vector<std::uint32_t> col_ids;
    std::vector<std::uint32_t> counts;
    std::vector<std::uint64_t> row_totals;

    bool row_empty(std::uint32_t w) const { return row_ptr[w] == row_ptr[w + 1]; }
    std::uint64_t row_total(std::uint32_t w) const { return row_totals[w]; }
    std::span<const std::uint32_t> row_cols(std::uint32_t w) const;
    std::span<const std::uint32_t> row_counts(std::uint32_t w) const;

    std::vector<std::uint32_t> empty_rows() const;
};

// Streaming counter. Documents are delimited by end_document(); token ids
// are resolved against the vocabulary as they arrive, and a bounded buffer
// keeps memory flat on arbitrarily long documents. Counters built over
// disjoint shards merge into the same matrix a single pass would produce.
class CoocCounter {
public:
    CoocCounter(const Vocabulary& vocab, std::uint32_t window,
                std::size_t flush_block = 1u << 20);

    void add_token(std::string_view token);
    void end_document();
    void add_document(std::span<const std::string> tokens);

    void merge(const CoocCounter& other);
    CoocMatrix finalize();

private:
    void bump(std::uint32_t center, std::uint32_t context);
    void flush_centers(std::size_t upto);

    const Vocabulary& vocab_;
    std::uint32_t window_;
    std::size_t flush_block_;
    std::vector<std::int64_t> buf_;  // token ids, -1 for out-of-vocabulary
    std::size_t next_center_ = 0;
    std::unordered_map<std::uint64_t, std::uint32_t> cells_;
};

// P_w: n(c,w) / sum_j n(c_j,w). Throws if the row is empty.
SparseVector row_distribution(const CoocMatrix& cooc, std::uint32_t w);

SqrtDistribution sqrt_transform(const SparseVector& prob);

// Convenience: distribution + square root in one step.
SqrtDistribution sqrt_row(const CoocMatrix& cooc, std::uint32_t w);

// sqrt rows for every word; rows without counts are left with dim == 0.
std::vector<SqrtDistribution> all_sqrt_rows(const CoocMatrix& cooc);

// (1/sqrt(2)) * ||sqrt(P) - sqrt(Q)||_2 for dense probability vectors.
double hellinger_distance(std::span<const double> p, std::span<const double> q);

// Context counts from symmetric windows around every occurrence of the
// given contiguous word-id sequence (the phrase tokens themselves are not
// counted). Feeds representation inference for unseen words and phrases.
// Throws if the sequence occurs in none of the documents.
SparseVector collect_phrase_context_counts(std::span<const std::vector<std::string>> documents,
                                           const Vocabulary& vocab,
                                           std::span<const std::uint32_t> phrase_ids,
                                           std::uint32_t window);

// Text triplet format: "#rows=<|W|> cols=<|D|> window=<w>" header, then
// "word_id context_id count" lines sorted by (word_id, context_id).
void write_cooc(const std::string& path, const CoocMatrix& cooc);
CoocMatrix read_cooc(const std::string& path);

}  // namespace phrasevec
