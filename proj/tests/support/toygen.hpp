#pragma once

// Deterministic planted-phrase corpus generator. A set of short phrases is
// emitted over and over, each wrapped in its own small set of signature
// context words, with zipf-ish background chatter in between. Constituents
// of a phrase end up with sharply peaked, mutually similar context
// distributions, which is exactly the structure the joint objective is
// supposed to exploit.

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

struct ToyCorpusSpec {
    std::uint64_t seed = 42;
    std::size_t n_phrases = 50;
    std::size_t phrase_word_pool = 140;
    std::size_t context_word_pool = 40;
    std::size_t background_words = 60;
    std::size_t target_tokens = 100000;
    std::size_t documents = 4;
};

struct ToyCorpus {
    std::vector<std::string> documents;     // one text blob per document
    std::vector<std::string> phrase_lines;  // the planted phrases
    std::size_t tokens = 0;
};

namespace detail {

inline std::string letter_name(const char* prefix, std::size_t i) {
    std::string s(prefix);
    s += static_cast<char>('a' + (i / 26) % 26);
    s += static_cast<char>('a' + i % 26);
    if (i >= 26 * 26) s += static_cast<char>('a' + (i / (26 * 26)) % 26);
    return s;
}

inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

}  // namespace detail

inline ToyCorpus make_planted_corpus(const ToyCorpusSpec& spec) {
    std::mt19937_64 rng(spec.seed);

    std::vector<std::string> phrase_words, context_words, background;
    for (std::size_t i = 0; i < spec.phrase_word_pool; ++i)
        phrase_words.push_back(detail::letter_name("p", i));
    for (std::size_t i = 0; i < spec.context_word_pool; ++i)
        context_words.push_back(detail::letter_name("c", i));
    for (std::size_t i = 0; i < spec.background_words; ++i)
        background.push_back(detail::letter_name("b", i));

    // Phrases of 2..4 words; constituents drawn without replacement while
    // the pool lasts, so signatures stay unambiguous.
    std::vector<std::vector<std::string>> phrases(spec.n_phrases);
    std::vector<std::vector<std::string>> signatures(spec.n_phrases);
    std::size_t next_word = 0;
    for (std::size_t p = 0; p < spec.n_phrases; ++p) {
        const std::size_t len = 2 + detail::bounded(rng, 3);
        for (std::size_t t = 0; t < len; ++t) {
            const std::size_t w = next_word < phrase_words.size()
                                      ? next_word++
                                      : detail::bounded(rng, phrase_words.size());
            phrases[p].push_back(phrase_words[w]);
        }
        for (std::size_t t = 0; t < 3; ++t) {
            signatures[p].push_back(context_words[detail::bounded(rng, context_words.size())]);
        }
    }

    // Zipf-ish background sampler.
    std::vector<double> bg_cdf(background.size());
    double total = 0.0;
    for (std::size_t i = 0; i < background.size(); ++i) {
        total += 1.0 / static_cast<double>(i + 1);
        bg_cdf[i] = total;
    }
    const auto draw_background = [&]() -> const std::string& {
        const double u = (static_cast<double>(rng() >> 11) * 0x1.0p-53) * total;
        std::size_t lo = 0, hi = background.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (bg_cdf[mid] < u) lo = mid + 1; else hi = mid;
        }
        return background[lo];
    };

    ToyCorpus corpus;
    corpus.documents.resize(spec.documents);
    std::size_t doc = 0;
    std::size_t next_phrase = 0;
    while (corpus.tokens < spec.target_tokens) {
        std::string& out = corpus.documents[doc];
        doc = (doc + 1) % spec.documents;
        if (detail::bounded(rng, 100) < 55) {
            // Phrase event: signature words hug the phrase on both sides.
            const std::size_t p = next_phrase;
            next_phrase = (next_phrase + 1) % spec.n_phrases;
            out += signatures[p][0];
            out += ' ';
            out += signatures[p][1];
            for (const auto& w : phrases[p]) {
                out += ' ';
                out += w;
            }
            out += ' ';
            out += signatures[p][2];
            out += '\n';
            corpus.tokens += phrases[p].size() + 3;
        } else {
            const std::size_t len = 4 + detail::bounded(rng, 5);
            for (std::size_t i = 0; i < len; ++i) {
                if (i) out += ' ';
                out += draw_background();
            }
            out += '\n';
            corpus.tokens += len;
        }
    }

    for (const auto& phrase : phrases) {
        std::string line;
        for (std::size_t i = 0; i < phrase.size(); ++i) {
            if (i) line += ' ';
            line += phrase[i];
        }
        corpus.phrase_lines.push_back(line);
    }
    return corpus;
}

}  // namespace testsupport
