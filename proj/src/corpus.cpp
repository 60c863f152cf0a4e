#include "phrasevec/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "phrasevec/io.hpp"

namespace phrasevec {

namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ascii_punct(char32_t cp) {
    return cp < 128 && std::ispunct(static_cast<unsigned char>(cp));
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

struct Decoded {
    char32_t cp;
    std::uint32_t len;
};

// Strict UTF-8 decode of the sequence starting at text[i]; rejects overlong
// forms, surrogates and values past U+10FFFF.
Decoded decode_utf8(std::string_view text, std::size_t i, std::size_t abs_offset) {
    const auto fail = [&]() -> Decoded {
        throw TokenizeError("invalid UTF-8 byte sequence at offset " +
                                std::to_string(abs_offset + i),
                            abs_offset + i);
    };
    const unsigned char b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) return {b0, 1};
    std::uint32_t len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else return fail();
    if (i + len > text.size()) return fail();
    for (std::uint32_t k = 1; k < len; ++k) {
        const unsigned char b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) return fail();
        cp = (cp << 6) | (b & 0x3F);
    }
    if (len == 2 && cp < 0x80) return fail();
    if (len == 3 && cp < 0x800) return fail();
    if (len == 4 && cp < 0x10000) return fail();
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return fail();
    return {cp, len};
}

// One whitespace-delimited unit: peel leading/trailing ASCII punctuation
// into their own tokens, normalize the core.
void emit_unit(std::string_view unit, const TokenSink& sink) {
    std::size_t begin = 0, end = unit.size();
    std::vector<char> trailing;
    while (begin < end && is_ascii_punct(static_cast<unsigned char>(unit[begin]))) {
        sink(std::string(1, unit[begin]));
        ++begin;
    }
    while (end > begin && is_ascii_punct(static_cast<unsigned char>(unit[end - 1]))) {
        trailing.push_back(unit[end - 1]);
        --end;
    }
    if (auto tok = normalize_token(unit.substr(begin, end - begin))) {
        sink(std::move(*tok));
    }
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
        sink(std::string(1, *it));
    }
}

void tokenize_buffer(std::string_view text, std::size_t abs_offset, const TokenSink& sink) {
    std::size_t i = 0;
    std::size_t unit_start = 0;
    bool in_unit = false;
    while (i < text.size()) {
        const Decoded d = decode_utf8(text, i, abs_offset);
        if (is_unicode_space(d.cp)) {
            if (in_unit) {
                emit_unit(text.substr(unit_start, i - unit_start), sink);
                in_unit = false;
            }
        } else if (!in_unit) {
            unit_start = i;
            in_unit = true;
        }
        i += d.len;
    }
    if (in_unit) emit_unit(text.substr(unit_start), sink);
}

}  // namespace

std::optional<std::string> normalize_token(std::string_view raw) {
    if (raw.empty()) return std::nullopt;
    std::string lowered;
    lowered.reserve(raw.size());
    for (char c : raw) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    std::string out;
    out.reserve(lowered.size());
    std::size_t i = 0;
    while (i < lowered.size()) {
        if (is_ascii_digit(lowered[i])) {
            out.append(kNumberToken);
            while (i < lowered.size() && is_ascii_digit(lowered[i])) ++i;
        } else {
            out.push_back(lowered[i++]);
        }
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    tokenize_buffer(text, 0, [&](std::string&& tok) { out.push_back(std::move(tok)); });
    return out;
}

void tokenize_stream(std::istream& in, const TokenSink& sink) {
    // Newlines are separators, so tokens never span lines and per-line
    // buffering is safe.
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        tokenize_buffer(line, offset, sink);
        offset += line.size() + 1;
    }
}

void VocabCounter::add(std::string_view token) {
    ++counts_[std::string(token)];
    ++total_;
}

void VocabCounter::merge(const VocabCounter& other) {
    for (const auto& [word, count] : other.counts_) counts_[word] += count;
    total_ += other.total_;
}

Vocabulary VocabCounter::build(std::uint64_t min_count, std::uint32_t context_size) const {
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (context_size < 1) throw std::invalid_argument("context_size must be >= 1");
    if (counts_.empty()) throw std::runtime_error("empty corpus");

    Vocabulary vocab;
    vocab.entries.reserve(counts_.size());
    for (const auto& [word, count] : counts_) {
        if (count >= min_count) vocab.entries.push_back({word, count});
    }
    std::sort(vocab.entries.begin(), vocab.entries.end(),
              [](const Vocabulary::Entry& a, const Vocabulary::Entry& b) {
                  if (a.count != b.count) return a.count > b.count;
                  return a.word < b.word;
              });
    vocab.word_to_id.reserve(vocab.entries.size());
    for (std::uint32_t id = 0; id < vocab.entries.size(); ++id) {
        vocab.word_to_id.emplace(vocab.entries[id].word, id);
    }
    vocab.context_size = std::min<std::uint32_t>(context_size, vocab.size());
    return vocab;
}

Vocabulary build_vocabulary(const std::vector<std::string>& tokens,
                            std::uint64_t min_count, std::uint32_t context_size) {
    VocabCounter counter;
    for (const auto& tok : tokens) counter.add(tok);
    return counter.build(min_count, context_size);
}

void write_vocabulary(const std::string& path, const Vocabulary& vocab) {
    std::string out = "#words=" + std::to_string(vocab.size()) +
                      " context=" + std::to_string(vocab.context_size) + "\n";
    for (const auto& e : vocab.entries) {
        out += e.word;
        out += '\t';
        out += std::to_string(e.count);
        out += '\n';
    }
    atomic_write_file(path, out);
}

Vocabulary read_vocabulary(const std::string& path) {
    const std::string text = read_file(path);
    Vocabulary vocab;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::uint64_t declared_words = 0, declared_context = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        if (line_no == 0) {
            if (line.rfind("#words=", 0) != 0)
                throw std::runtime_error(path + ": missing vocabulary header");
            std::size_t sp = line.find(' ');
            if (sp == std::string_view::npos || line.substr(sp + 1).rfind("context=", 0) != 0)
                throw std::runtime_error(path + ": malformed vocabulary header");
            declared_words = parse_u64(line.substr(7, sp - 7), path + " header");
            declared_context = parse_u64(line.substr(sp + 9), path + " header");
            ++line_no;
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw std::runtime_error(path + ": expected word<TAB>count on line " +
                                     std::to_string(line_no + 1));
        Vocabulary::Entry e;
        e.word = std::string(line.substr(0, tab));
        e.count = parse_u64(line.substr(tab + 1), path);
        vocab.word_to_id.emplace(e.word, static_cast<std::uint32_t>(vocab.entries.size()));
        vocab.entries.push_back(std::move(e));
        ++line_no;
    }
    if (vocab.entries.size() != declared_words)
        throw std::runtime_error(path + ": header declares " + std::to_string(declared_words) +
                                 " words, file has " + std::to_string(vocab.entries.size()));
    if (declared_context > vocab.entries.size())
        throw std::runtime_error(path + ": context size exceeds word count");
    vocab.context_size = static_cast<std::uint32_t>(declared_context);
    return vocab;
}

}  // namespace phrasevec
