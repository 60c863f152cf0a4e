#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "phrasevec/corpus.hpp"
#include "phrasevec/io.hpp"
#include "support/tempdir.hpp"

using namespace phrasevec;

TEST_CASE("normalize_token lowercases") {
    CHECK(normalize_token("Cat").value() == "cat");
    CHECK(normalize_token("HELLO").value() == "hello");
}

TEST_CASE("normalize_token replaces digit runs with the sentinel") {
    CHECK(normalize_token("1984").value() == "NUMBER");
    CHECK(normalize_token("x07y13").value() == "xNUMBERyNUMBER");
}

TEST_CASE("normalize_token lowercases before digit replacement") {
    // Keeps the sentinel uppercase and distinct from surrounding text.
    CHECK(normalize_token("B2B").value() == "bNUMBERb");
}

TEST_CASE("normalize_token drops empty input") {
    CHECK(!normalize_token("").has_value());
}

TEST_CASE("normalize_token passes non-ascii bytes through") {
    CHECK(normalize_token("caf\xc3\xa9").value() == "caf\xc3\xa9");
}

TEST_CASE("tokenize splits words and peels punctuation") {
    CHECK(tokenize("The red cat.") == std::vector<std::string>{"the", "red", "cat", "."});
    CHECK(tokenize("In 1984,") == std::vector<std::string>{"in", "NUMBER", ","});
    CHECK(tokenize("(hello)!") == std::vector<std::string>{"(", "hello", ")", "!"});
    CHECK(tokenize("well-known") == std::vector<std::string>{"well-known"});
    CHECK(tokenize("...") == std::vector<std::string>{".", ".", "."});
}

TEST_CASE("tokenize handles empty and whitespace-only input") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("  \t \n ").empty());
}

TEST_CASE("tokenize accepts unicode whitespace and text") {
    // U+2003 EM SPACE between words, U+00E9 in the second.
    CHECK(tokenize("a\xe2\x80\x83""caf\xc3\xa9") == std::vector<std::string>{"a", "caf\xc3\xa9"});
}

TEST_CASE("tokenize reports invalid utf-8 with its byte offset") {
    const std::string bad = std::string("ok ") + char(0xFF) + "x";
    CHECK_THROWS_AS(tokenize(bad), TokenizeError);
    try {
        tokenize(bad);
    } catch (const TokenizeError& e) {
        CHECK(e.byte_offset == 3);
    }
    // Truncated multi-byte sequence at the end.
    CHECK_THROWS_AS(tokenize(std::string("a\xc3")), TokenizeError);
}

TEST_CASE("tokenize_stream matches whole-buffer tokenization") {
    const std::string text = "One two,\nthree 44 five.\n";
    std::istringstream in(text);
    std::vector<std::string> streamed;
    tokenize_stream(in, [&](std::string&& t) { streamed.push_back(std::move(t)); });
    CHECK(streamed == tokenize(text));
}

TEST_CASE("build_vocabulary hand counts") {
    const std::vector<std::string> tokens{"a", "a", "b"};
    const Vocabulary v = build_vocabulary(tokens, 1, 2);
    REQUIRE(v.size() == 2);
    CHECK(v.entries[0].word == "a");
    CHECK(v.entries[0].count == 2);
    CHECK(v.entries[1].word == "b");
    CHECK(v.entries[1].count == 1);
    CHECK(v.context_size == 2);
}

TEST_CASE("build_vocabulary min_count filter clips the context size") {
    const std::vector<std::string> tokens{"a", "a", "b"};
    const Vocabulary v = build_vocabulary(tokens, 2, 10);
    REQUIRE(v.size() == 1);
    CHECK(v.entries[0].word == "a");
    CHECK(v.context_size == 1);
}

TEST_CASE("build_vocabulary breaks count ties lexicographically") {
    const std::vector<std::string> tokens{"pear", "apple", "pear", "apple", "fig"};
    const Vocabulary v = build_vocabulary(tokens, 1, 10);
    CHECK(v.entries[0].word == "apple");
    CHECK(v.entries[1].word == "pear");
    CHECK(v.entries[2].word == "fig");
    CHECK(v.id_of("apple").value() == 0);
    CHECK(!v.id_of("missing").has_value());
}

TEST_CASE("build_vocabulary rejects an empty stream") {
    CHECK_THROWS(build_vocabulary({}, 1, 1));
}

TEST_CASE("vocabulary count conservation") {
    std::mt19937_64 rng(7);
    std::vector<std::string> tokens;
    for (int i = 0; i < 5000; ++i) {
        tokens.push_back("w" + std::to_string(rng() % 37));
    }
    const Vocabulary v = build_vocabulary(tokens, 1, 10);
    std::uint64_t sum = 0;
    for (const auto& e : v.entries) sum += e.count;
    CHECK(sum == tokens.size());

    // With a threshold, kept + discarded = total.
    const Vocabulary filtered = build_vocabulary(tokens, 100, 10);
    std::uint64_t kept = 0;
    for (const auto& e : filtered.entries) kept += e.count;
    std::uint64_t discarded = 0;
    for (const auto& e : v.entries) {
        if (e.count < 100) discarded += e.count;
    }
    CHECK(kept + discarded == tokens.size());
}

TEST_CASE("vocabulary ordering invariant") {
    std::mt19937_64 rng(11);
    std::vector<std::string> tokens;
    for (int i = 0; i < 2000; ++i) tokens.push_back("t" + std::to_string(rng() % 101));
    const Vocabulary v = build_vocabulary(tokens, 1, 50);
    for (std::size_t i = 0; i + 1 < v.entries.size(); ++i) {
        const auto& a = v.entries[i];
        const auto& b = v.entries[i + 1];
        CHECK((a.count > b.count || (a.count == b.count && a.word < b.word)));
    }
}

TEST_CASE("sharded counting merges to the single-pass result") {
    std::mt19937_64 rng(3);
    std::vector<std::string> tokens;
    for (int i = 0; i < 3000; ++i) tokens.push_back("s" + std::to_string(rng() % 23));

    VocabCounter whole;
    for (const auto& t : tokens) whole.add(t);

    VocabCounter a, b, c;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        (i % 3 == 0 ? a : i % 3 == 1 ? b : c).add(tokens[i]);
    }
    a.merge(b);
    a.merge(c);

    const Vocabulary lhs = whole.build(2, 10);
    const Vocabulary rhs = a.build(2, 10);
    REQUIRE(lhs.size() == rhs.size());
    for (std::uint32_t i = 0; i < lhs.size(); ++i) {
        CHECK(lhs.entries[i].word == rhs.entries[i].word);
        CHECK(lhs.entries[i].count == rhs.entries[i].count);
    }
}

TEST_CASE("vocabulary file round-trip and determinism") {
    testsupport::TempDir tmp("vocab");
    const std::vector<std::string> tokens{"b", "a", "a", "c", "c", "c"};
    const Vocabulary v = build_vocabulary(tokens, 1, 2);
    const std::string p1 = tmp.file("v1.tsv");
    const std::string p2 = tmp.file("v2.tsv");
    write_vocabulary(p1, v);
    write_vocabulary(p2, v);
    CHECK(read_file(p1) == read_file(p2));

    const Vocabulary back = read_vocabulary(p1);
    REQUIRE(back.size() == v.size());
    CHECK(back.context_size == v.context_size);
    for (std::uint32_t i = 0; i < v.size(); ++i) {
        CHECK(back.entries[i].word == v.entries[i].word);
        CHECK(back.entries[i].count == v.entries[i].count);
    }
}

TEST_CASE("read_vocabulary validates the header") {
    testsupport::TempDir tmp("vocab-bad");
    const std::string p = tmp.write("bad.tsv", "nonsense\na\t1\n");
    CHECK_THROWS(read_vocabulary(p));
    const std::string p2 = tmp.write("short.tsv", "#words=3 context=1\na\t1\n");
    CHECK_THROWS(read_vocabulary(p2));
}
