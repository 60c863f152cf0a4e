#pragma once

// Corpus normalization, tokenization and vocabulary construction.
//
// Normalization: ASCII lowercasing first, then every maximal run of ASCII
// digits is replaced by the reserved sentinel "NUMBER" (inserted verbatim,
// so it stays distinct from the natural word "number"). Bytes outside
// ASCII pass through untouched.
//
// Tokenization: input is validated UTF-8, split on Unicode whitespace;
// leading and trailing ASCII punctuation of each unit is peeled off into
// single-character tokens. Deterministic for a fixed byte stream.

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phrasevec {

inline constexpr std::string_view kNumberToken = "NUMBER";

struct TokenizeError : std::runtime_error {
    std::size_t byte_offset;
    TokenizeError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), byte_offset(offset) {}
};

// Lowercase + digit-run replacement; empty input yields nothing.
std::optional<std::string> normalize_token(std::string_view raw);

using TokenSink = std::function<void(std::string&&)>;

// Tokenize a whole in-memory buffer. Throws TokenizeError on invalid UTF-8,
// with the offending byte offset.
std::vector<std::string> tokenize(std::string_view text);

// Streaming variant; offsets in errors are absolute within the stream.
void tokenize_stream(std::istream& in, const TokenSink& sink);

struct Vocabulary {
    struct Entry {
        std::string word;
        std::uint64_t count = 0;
    };

    // id order: descending count, ties broken lexicographically.
    std::vector<Entry> entries;
    std::unordered_map<std::string, std::uint32_t> word_to_id;
    // The context dictionary is the first |D| entries.
    std::uint32_t context_size = 0;

    std::uint32_t size() const { return static_cast<std::uint32_t>(entries.size()); }

    std::optional<std::uint32_t> id_of(std::string_view word) const {
        auto it = word_to_id.find(std::string(word));
        if (it == word_to_id.end()) return std::nullopt;
        return it->second;
    }

    bool is_context(std::uint32_t id) const { return id < context_size; }
};

// Shardable token counter; merging shards is exact integer addition, so the
// merged build is byte-identical to a single-threaded pass.
class VocabCounter {
public:
    void add(std::string_view token);
    void merge(const VocabCounter& other);
    std::uint64_t total_tokens() const { return total_; }

    // Sort, filter by min_count, assign dense ids, mark the context subset.
    Vocabulary build(std::uint64_t min_count, std::uint32_t context_size) const;

private:
    std::unordered_map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

Vocabulary build_vocabulary(const std::vector<std::string>& tokens,
                            std::uint64_t min_count, std::uint32_t context_size);

// TSV with a "#words=<n> context=<d>" header, one word<TAB>count per line
// in id order.
void write_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::string& path);

}  // namespace phrasevec
