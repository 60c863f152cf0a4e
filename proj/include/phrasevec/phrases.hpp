#pragma once

// Phrase chunk ingestion. Chunks normally come from a file produced by an
// external chunker; naive_chunks is a deliberately simple n-gram fallback
// for building test corpora, not a linguistic tool.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "phrasevec/corpus.hpp"

namespace phrasevec {

inline constexpr std::size_t kMaxPhraseWords = 8;

struct Phrase {
    std::vector<std::uint32_t> word_ids;
    std::uint64_t count = 1;
};

struct PhraseSet {
    std::vector<Phrase> phrases;
    std::uint64_t min_phrase_count = 1;

    std::size_t size() const { return phrases.size(); }
};

struct PhraseLoadReport {
    std::size_t lines = 0;
    std::size_t kept = 0;
    std::size_t dropped_oov = 0;
    std::size_t dropped_no_counts = 0;  // a word had an empty co-occurrence row
    std::size_t dropped_below_min = 0;
    std::size_t dropped_too_long = 0;
};

// File format: one phrase per line, space-separated tokens, optional
// trailing <TAB>count. Lines are normalized with the corpus tokenizer,
// duplicates are merged by summing counts, then the min-count filter runs.
// nonempty_rows (by word id) may be null to skip the empty-row filter.
PhraseSet load_phrases(const std::string& path, const Vocabulary& vocab,
                       const std::vector<bool>* nonempty_rows, std::uint64_t min_phrase_count,
                       PhraseLoadReport* report = nullptr);

// In-memory variant over already-read lines (used by load_phrases and tests).
PhraseSet build_phrase_set(std::span<const std::string> lines, const Vocabulary& vocab,
                           const std::vector<bool>* nonempty_rows,
                           std::uint64_t min_phrase_count, PhraseLoadReport* report = nullptr);

struct PhraseSplit {
    PhraseSet train;
    PhraseSet valid;
    PhraseSet test;
};

// Seeded uniform shuffle, then [valid | test | train] partition.
PhraseSplit split_phrases(const PhraseSet& set, std::size_t n_valid, std::size_t n_test,
                          std::uint64_t seed);

// All contiguous in-vocabulary n-grams (2..max_len) that do not cross a
// punctuation token, deduplicated with occurrence counts.
std::vector<Phrase> naive_chunks(std::span<const std::string> tokens, const Vocabulary& vocab,
                                 std::size_t max_len);

std::string phrase_text(const Phrase& phrase, const Vocabulary& vocab);

void write_phrases(const std::string& path, const PhraseSet& set, const Vocabulary& vocab);

}  // namespace phrasevec
