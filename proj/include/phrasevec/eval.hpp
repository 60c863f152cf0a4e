#pragma once

// Evaluation harness: word similarity (Spearman over cosine scores), word
// analogy (3CosAdd on unit vectors, query words excluded), phrase word
// retrieval (dot-product scores, top K*T pool), and nearest-neighbor
// queries over words and phrase collections. All functions are pure reads
// of the embedding table; items with out-of-vocabulary words are skipped
// and counted, never silently dropped.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phrasevec/cooc.hpp"
#include "phrasevec/model.hpp"
#include "phrasevec/svd.hpp"

namespace phrasevec {

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::vector<std::string> words, std::uint32_t dim,
                   std::vector<double> vectors);

    std::uint32_t size() const { return static_cast<std::uint32_t>(words_.size()); }
    std::uint32_t dim() const { return dim_; }
    const std::string& word(std::uint32_t i) const { return words_[i]; }
    std::span<const double> vec(std::uint32_t i) const {
        return {vectors_.data() + std::size_t(i) * dim_, dim_};
    }
    std::optional<std::uint32_t> find(std::string_view word) const;

private:
    std::vector<std::string> words_;
    std::uint32_t dim_ = 0;
    std::vector<double> vectors_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

// Encode every word with context counts through the model.
EmbeddingTable table_from_model(const Model& model, const CoocMatrix& cooc,
                                const Vocabulary& vocab);

EmbeddingTable table_from_svd(const SvdResult& svd, double sigma_exponent,
                              const DesignMatrix& design, const Vocabulary& vocab);

// Text format: "<count> <dim>" header, then "word v1 ... vm" per line with
// round-trip-exact floats.
void write_embeddings(const std::string& path, const EmbeddingTable& table);
EmbeddingTable read_embeddings(const std::string& path);

double cosine(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct SimilarityPair {
    std::string word1;
    std::string word2;
    double human_score = 0.0;
};

// TSV: word1<TAB>word2<TAB>score (spaces accepted as separators too).
std::vector<SimilarityPair> read_similarity_pairs(const std::string& path);

struct SimilarityResult {
    double rho = 0.0;
    std::size_t covered = 0;
    std::size_t total = 0;
};

SimilarityResult eval_similarity(const EmbeddingTable& table,
                                 std::span<const SimilarityPair> pairs);

struct AnalogyQuestion {
    std::string a, b, c, d;
    std::string section;
};

// word2vec question format: 4 words per line, ": section" headers.
std::vector<AnalogyQuestion> read_analogy_questions(const std::string& path);

struct AnalogySectionResult {
    std::size_t correct = 0;
    std::size_t covered = 0;
    std::size_t total = 0;
};

struct AnalogyResult {
    std::size_t correct = 0;
    std::size_t covered = 0;
    std::size_t total = 0;
    std::map<std::string, AnalogySectionResult> sections;

    double accuracy() const {
        return covered ? static_cast<double>(correct) / static_cast<double>(covered) : 0.0;
    }
};

AnalogyResult eval_analogy(const EmbeddingTable& table,
                           std::span<const AnalogyQuestion> questions);

struct PhraseRetrievalResult {
    // K -> mean recall over covered phrases.
    std::map<std::uint32_t, double> recall;
    // phrase length -> (K -> mean recall), the per-length breakdown.
    std::map<std::uint32_t, std::map<std::uint32_t, double>> recall_by_length;
    std::map<std::uint32_t, std::size_t> phrases_by_length;
    std::size_t covered = 0;
    std::size_t skipped_oov = 0;
};

// For a T-word phrase and each K: score all words by dot product with the
// averaged phrase vector, pool the top K*T, and measure the fraction of
// the phrase's distinct words inside the pool.
PhraseRetrievalResult eval_phrase_retrieval(const EmbeddingTable& table,
                                            std::span<const std::vector<std::string>> phrases,
                                            std::span<const std::uint32_t> k_values,
                                            std::uint32_t threads = 1);

enum class Metric { dot, cosine };

struct ScoredWord {
    std::uint32_t id = 0;
    double score = 0.0;
};

// Top-k table entries by the requested metric; ties by ascending word id.
std::vector<ScoredWord> nearest_words(const EmbeddingTable& table, std::span<const double> query,
                                      std::size_t k, Metric metric);

struct ScoredPhrase {
    std::size_t index = 0;  // into the phrase collection
    double score = 0.0;
};

// Cosine ranking of a query vector against phrase-collection vectors built
// by averaging word vectors. Collection phrases with out-of-table words are
// skipped; their indices never appear in the result.
std::vector<ScoredPhrase> nearest_phrases(const EmbeddingTable& table,
                                          std::span<const std::vector<std::string>> collection,
                                          std::span<const double> query, std::size_t k);

// One phrase per line, whitespace-separated tokens, optional <TAB>count.
std::vector<std::vector<std::string>> read_phrase_lines(const std::string& path);

}  // namespace phrasevec
