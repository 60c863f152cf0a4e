#include "phrasevec/phrases.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "phrasevec/io.hpp"

namespace phrasevec {

namespace {

bool is_punct_token(const std::string& tok) {
    return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](unsigned char c) {
        return std::ispunct(c);
    });
}

// Fisher-Yates with an engine-native bounded draw; keeps splits identical
// across platforms.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % i;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(items[i - 1], items[r % i]);
    }
}

}  // namespace

PhraseSet build_phrase_set(std::span<const std::string> lines, const Vocabulary& vocab,
                           const std::vector<bool>* nonempty_rows,
                           std::uint64_t min_phrase_count, PhraseLoadReport* report) {
    PhraseLoadReport local;
    std::map<std::vector<std::uint32_t>, std::uint64_t> merged;
    for (const auto& raw_line : lines) {
        std::string_view line = raw_line;
        if (line.empty()) continue;
        ++local.lines;
        std::uint64_t count = 1;
        const std::size_t tab = line.find('\t');
        if (tab != std::string_view::npos) {
            count = parse_u64(line.substr(tab + 1), "phrase count");
            line = line.substr(0, tab);
        }
        const std::vector<std::string> tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() > kMaxPhraseWords) {
            ++local.dropped_too_long;
            continue;
        }
        std::vector<std::uint32_t> ids;
        ids.reserve(tokens.size());
        bool ok = true;
        for (const auto& tok : tokens) {
            const auto id = vocab.id_of(tok);
            if (!id) {
                ++local.dropped_oov;
                ok = false;
                break;
            }
            if (nonempty_rows && !(*nonempty_rows)[*id]) {
                ++local.dropped_no_counts;
                ok = false;
                break;
            }
            ids.push_back(*id);
        }
        if (!ok) continue;
        merged[ids] += count;
    }

    PhraseSet set;
    set.min_phrase_count = min_phrase_count;
    for (const auto& [ids, count] : merged) {
        if (count < min_phrase_count) {
            ++local.dropped_below_min;
            continue;
        }
        set.phrases.push_back({ids, count});
    }
    local.kept = set.phrases.size();
    if (report) *report = local;
    if (set.phrases.empty()) throw std::runtime_error("no phrases survived filtering");
    return set;
}

PhraseSet load_phrases(const std::string& path, const Vocabulary& vocab,
                       const std::vector<bool>* nonempty_rows, std::uint64_t min_phrase_count,
                       PhraseLoadReport* report) {
    const std::string text = read_file(path);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        lines.emplace_back(text.substr(pos, eol - pos));
        pos = eol + 1;
    }
    return build_phrase_set(lines, vocab, nonempty_rows, min_phrase_count, report);
}

PhraseSplit split_phrases(const PhraseSet& set, std::size_t n_valid, std::size_t n_test,
                          std::uint64_t seed) {
    if (n_valid + n_test >= set.size())
        throw std::invalid_argument("split sizes leave no training phrases");
    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    seeded_shuffle(order, rng);

    PhraseSplit split;
    split.train.min_phrase_count = split.valid.min_phrase_count = split.test.min_phrase_count =
        set.min_phrase_count;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Phrase& p = set.phrases[order[i]];
        if (i < n_valid) {
            split.valid.phrases.push_back(p);
        } else if (i < n_valid + n_test) {
            split.test.phrases.push_back(p);
        } else {
            split.train.phrases.push_back(p);
        }
    }
    return split;
}

std::vector<Phrase> naive_chunks(std::span<const std::string> tokens, const Vocabulary& vocab,
                                 std::size_t max_len) {
    if (max_len < 2 || max_len > kMaxPhraseWords)
        throw std::invalid_argument("max_len must be in 2..8");
    std::map<std::vector<std::uint32_t>, std::uint64_t> merged;
    const std::size_t n = tokens.size();
    for (std::size_t start = 0; start < n; ++start) {
        std::vector<std::uint32_t> ids;
        for (std::size_t len = 1; len <= max_len && start + len <= n; ++len) {
            const std::string& tok = tokens[start + len - 1];
            if (is_punct_token(tok)) break;
            const auto id = vocab.id_of(tok);
            if (!id) break;
            ids.push_back(*id);
            if (len >= 2) ++merged[ids];
        }
    }
    std::vector<Phrase> out;
    out.reserve(merged.size());
    for (const auto& [ids, count] : merged) out.push_back({ids, count});
    return out;
}

std::string phrase_text(const Phrase& phrase, const Vocabulary& vocab) {
    std::string out;
    for (std::size_t i = 0; i < phrase.word_ids.size(); ++i) {
        if (i) out += ' ';
        out += vocab.entries[phrase.word_ids[i]].word;
    }
    return out;
}

void write_phrases(const std::string& path, const PhraseSet& set, const Vocabulary& vocab) {
    std::string out;
    for (const auto& p : set.phrases) {
        out += phrase_text(p, vocab);
        out += '\t';
        out += std::to_string(p.count);
        out += '\n';
    }
    atomic_write_file(path, out);
}

}  // namespace phrasevec
