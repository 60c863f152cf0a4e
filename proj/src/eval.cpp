#include "phrasevec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "phrasevec/io.hpp"
#include "phrasevec/simd.hpp"

namespace phrasevec {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        lines.emplace_back(text.substr(pos, eol - pos));
        pos = eol + 1;
    }
    return lines;
}

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::runtime_error("correlation undefined: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> unit_vector(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    const double norm = std::sqrt(simd::sumsq(out.data(), out.size()));
    if (norm > 0.0) simd::scale(1.0 / norm, out.data(), out.size());
    return out;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, std::uint32_t dim,
                               std::vector<double> vectors)
    : words_(std::move(words)), dim_(dim), vectors_(std::move(vectors)) {
    if (vectors_.size() != std::size_t(dim_) * words_.size())
        throw std::invalid_argument("embedding table size mismatch");
    for (double v : vectors_) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite embedding entry");
    }
    index_.reserve(words_.size());
    for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::uint32_t> EmbeddingTable::find(std::string_view word) const {
    const auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EmbeddingTable table_from_model(const Model& model, const CoocMatrix& cooc,
                                const Vocabulary& vocab) {
    if (cooc.num_rows != vocab.size())
        throw std::invalid_argument("co-occurrence matrix does not match the vocabulary");
    std::vector<std::string> words;
    std::vector<double> vectors;
    for (std::uint32_t w = 0; w < cooc.num_rows; ++w) {
        if (cooc.row_empty(w)) continue;
        const auto code = encode(model, sqrt_row(cooc, w));
        words.push_back(vocab.entries[w].word);
        vectors.insert(vectors.end(), code.begin(), code.end());
    }
    return EmbeddingTable(std::move(words), model.dim(), std::move(vectors));
}

EmbeddingTable table_from_svd(const SvdResult& svd, double sigma_exponent,
                              const DesignMatrix& design, const Vocabulary& vocab) {
    const std::vector<double> emb = svd_embeddings(svd, sigma_exponent);
    std::vector<std::string> words;
    words.reserve(design.rows());
    for (const auto w : design.word_ids) words.push_back(vocab.entries[w].word);
    return EmbeddingTable(std::move(words), svd.k, std::vector<double>(emb));
}

void write_embeddings(const std::string& path, const EmbeddingTable& table) {
    std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
    for (std::uint32_t i = 0; i < table.size(); ++i) {
        out += table.word(i);
        for (const double v : table.vec(i)) {
            out += ' ';
            out += format_double(v);
        }
        out += '\n';
    }
    atomic_write_file(path, out);
}

EmbeddingTable read_embeddings(const std::string& path) {
    const std::string text = read_file(path);
    const auto lines = split_lines(text);
    if (lines.empty()) throw std::runtime_error(path + ": empty embedding file");
    const auto header = split_ws(lines[0]);
    if (header.size() != 2)
        throw std::runtime_error(path + ": expected '<count> <dim>' header");
    const auto count = parse_u64(header[0], path);
    const auto dim = parse_u64(header[1], path);
    std::vector<std::string> words;
    std::vector<double> vectors;
    words.reserve(count);
    vectors.reserve(count * dim);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_ws(lines[i]);
        if (fields.size() != dim + 1)
            throw std::runtime_error(path + ": wrong field count on line " + std::to_string(i + 1));
        words.emplace_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            vectors.push_back(parse_double(fields[j], path));
        }
    }
    if (words.size() != count)
        throw std::runtime_error(path + ": header declares " + std::to_string(count) +
                                 " words, file has " + std::to_string(words.size()));
    return EmbeddingTable(std::move(words), static_cast<std::uint32_t>(dim), std::move(vectors));
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    const double ab = simd::dot(a.data(), b.data(), a.size());
    const double aa = simd::sumsq(a.data(), a.size());
    const double bb = simd::sumsq(b.data(), b.size());
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("spearman: need at least two points");
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

std::vector<SimilarityPair> read_similarity_pairs(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<SimilarityPair> pairs;
    for (const auto& line : split_lines(text)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_ws(line);
        if (fields.size() != 3)
            throw std::runtime_error(path + ": expected 'word1 word2 score' lines");
        pairs.push_back({std::string(fields[0]), std::string(fields[1]),
                         parse_double(fields[2], path)});
    }
    return pairs;
}

SimilarityResult eval_similarity(const EmbeddingTable& table,
                                 std::span<const SimilarityPair> pairs) {
    if (pairs.empty()) throw std::invalid_argument("empty similarity dataset");
    SimilarityResult result;
    result.total = pairs.size();
    std::vector<double> model_scores, human_scores;
    for (const auto& pair : pairs) {
        const auto i = table.find(pair.word1);
        const auto j = table.find(pair.word2);
        if (!i || !j) continue;
        model_scores.push_back(cosine(table.vec(*i), table.vec(*j)));
        human_scores.push_back(pair.human_score);
    }
    result.covered = model_scores.size();
    if (result.covered == 0)
        throw std::runtime_error("no similarity pair is covered by the vocabulary");
    result.rho = spearman(model_scores, human_scores);
    return result;
}

std::vector<AnalogyQuestion> read_analogy_questions(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<AnalogyQuestion> questions;
    std::string section = "all";
    for (const auto& line : split_lines(text)) {
        if (line.empty()) continue;
        if (line[0] == ':') {
            const auto fields = split_ws(line.substr(1));
            section = fields.empty() ? "unnamed" : std::string(fields[0]);
            continue;
        }
        const auto fields = split_ws(line);
        if (fields.size() != 4)
            throw std::runtime_error(path + ": expected 4 words per question line");
        questions.push_back({std::string(fields[0]), std::string(fields[1]),
                             std::string(fields[2]), std::string(fields[3]), section});
    }
    return questions;
}

AnalogyResult eval_analogy(const EmbeddingTable& table,
                           std::span<const AnalogyQuestion> questions) {
    if (questions.empty()) throw std::invalid_argument("empty analogy dataset");

    // Unit-normalize once; 3CosAdd ranks by cosine to b - a + c.
    std::vector<double> unit(std::size_t(table.size()) * table.dim());
    for (std::uint32_t i = 0; i < table.size(); ++i) {
        const auto u = unit_vector(table.vec(i));
        std::copy(u.begin(), u.end(), unit.begin() + std::size_t(i) * table.dim());
    }
    const auto unit_row = [&](std::uint32_t i) {
        return std::span<const double>(unit.data() + std::size_t(i) * table.dim(), table.dim());
    };

    AnalogyResult result;
    result.total = questions.size();
    for (const auto& q : questions) {
        auto& section = result.sections[q.section];
        ++section.total;
        const auto a = table.find(q.a), b = table.find(q.b), c = table.find(q.c),
                   d = table.find(q.d);
        if (!a || !b || !c || !d) continue;
        ++result.covered;
        ++section.covered;
        std::vector<double> target(table.dim());
        for (std::uint32_t k = 0; k < table.dim(); ++k) {
            target[k] = unit_row(*b)[k] - unit_row(*a)[k] + unit_row(*c)[k];
        }
        std::uint32_t best = table.size();
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::uint32_t w = 0; w < table.size(); ++w) {
            if (w == *a || w == *b || w == *c) continue;
            const double score = cosine(unit_row(w), target);
            if (score > best_score) {
                best_score = score;
                best = w;
            }
        }
        if (best == *d) {
            ++result.correct;
            ++section.correct;
        }
    }
    return result;
}

std::vector<std::vector<std::string>> read_phrase_lines(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<std::vector<std::string>> phrases;
    for (const auto& raw : split_lines(text)) {
        std::string_view line = raw;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab != std::string_view::npos) line = line.substr(0, tab);
        auto tokens = tokenize(line);
        if (!tokens.empty()) phrases.push_back(std::move(tokens));
    }
    return phrases;
}

PhraseRetrievalResult eval_phrase_retrieval(const EmbeddingTable& table,
                                            std::span<const std::vector<std::string>> phrases,
                                            std::span<const std::uint32_t> k_values,
                                            std::uint32_t threads) {
    if (phrases.empty()) throw std::invalid_argument("empty phrase list");
    if (k_values.empty()) throw std::invalid_argument("no K values requested");

    struct PerPhrase {
        bool covered = false;
        std::uint32_t length = 0;
        std::vector<double> recall;  // parallel to k_values
    };

    const auto eval_one = [&](const std::vector<std::string>& words) -> PerPhrase {
        PerPhrase out;
        std::vector<std::uint32_t> ids;
        ids.reserve(words.size());
        for (const auto& w : words) {
            const auto id = table.find(w);
            if (!id) return out;
            ids.push_back(*id);
        }
        out.covered = true;
        out.length = static_cast<std::uint32_t>(ids.size());
        const std::uint32_t t_words = out.length;

        std::vector<std::vector<double>> vecs;
        vecs.reserve(ids.size());
        for (const auto id : ids) {
            vecs.emplace_back(table.vec(id).begin(), table.vec(id).end());
        }
        const std::vector<double> xs = compose_phrase(vecs);

        std::vector<std::uint32_t> unique_ids(ids);
        std::sort(unique_ids.begin(), unique_ids.end());
        unique_ids.erase(std::unique(unique_ids.begin(), unique_ids.end()), unique_ids.end());

        const std::uint32_t max_k = *std::max_element(k_values.begin(), k_values.end());
        const std::size_t max_pool = std::min<std::size_t>(std::size_t(max_k) * t_words,
                                                           table.size());
        const auto ranked = nearest_words(table, xs, max_pool, Metric::dot);

        out.recall.reserve(k_values.size());
        for (const auto k : k_values) {
            const std::size_t pool = std::min<std::size_t>(std::size_t(k) * t_words,
                                                           ranked.size());
            std::size_t hits = 0;
            for (std::size_t r = 0; r < pool; ++r) {
                if (std::binary_search(unique_ids.begin(), unique_ids.end(), ranked[r].id))
                    ++hits;
            }
            out.recall.push_back(static_cast<double>(hits) /
                                 static_cast<double>(unique_ids.size()));
        }
        return out;
    };

    std::vector<PerPhrase> per_phrase(phrases.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < phrases.size(); ++i) per_phrase[i] = eval_one(phrases[i]);
    } else {
        const std::size_t n_threads = std::min<std::size_t>(threads, phrases.size());
        const std::size_t chunk = (phrases.size() + n_threads - 1) / n_threads;
        std::vector<std::future<void>> futures;
        for (std::size_t t = 0; t < n_threads; ++t) {
            futures.push_back(std::async(std::launch::async, [&, t]() {
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(phrases.size(), lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) per_phrase[i] = eval_one(phrases[i]);
            }));
        }
        for (auto& f : futures) f.get();
    }

    PhraseRetrievalResult result;
    std::map<std::uint32_t, std::vector<double>> sums;          // K -> sum
    std::map<std::uint32_t, std::map<std::uint32_t, double>> by_len_sums;
    for (const auto& p : per_phrase) {
        if (!p.covered) {
            ++result.skipped_oov;
            continue;
        }
        ++result.covered;
        ++result.phrases_by_length[p.length];
        for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
            sums[k_values[ki]].push_back(p.recall[ki]);
            by_len_sums[p.length][k_values[ki]] += p.recall[ki];
        }
    }
    if (result.covered == 0)
        throw std::runtime_error("no phrase is fully covered by the embedding table");
    for (const auto& [k, values] : sums) {
        result.recall[k] = std::accumulate(values.begin(), values.end(), 0.0) /
                           static_cast<double>(values.size());
    }
    for (const auto& [len, ksums] : by_len_sums) {
        for (const auto& [k, sum] : ksums) {
            result.recall_by_length[len][k] =
                sum / static_cast<double>(result.phrases_by_length[len]);
        }
    }
    return result;
}

std::vector<ScoredWord> nearest_words(const EmbeddingTable& table, std::span<const double> query,
                                      std::size_t k, Metric metric) {
    if (query.size() != table.dim())
        throw std::invalid_argument("query dimension does not match the table");
    std::vector<ScoredWord> scored(table.size());
    for (std::uint32_t i = 0; i < table.size(); ++i) {
        const double s = metric == Metric::dot
                             ? simd::dot(query.data(), table.vec(i).data(), query.size())
                             : cosine(query, table.vec(i));
        scored[i] = {i, s};
    }
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                      [](const ScoredWord& a, const ScoredWord& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.id < b.id;
                      });
    scored.resize(take);
    return scored;
}

std::vector<ScoredPhrase> nearest_phrases(const EmbeddingTable& table,
                                          std::span<const std::vector<std::string>> collection,
                                          std::span<const double> query, std::size_t k) {
    if (query.size() != table.dim())
        throw std::invalid_argument("query dimension does not match the table");
    std::vector<ScoredPhrase> scored;
    scored.reserve(collection.size());
    for (std::size_t p = 0; p < collection.size(); ++p) {
        std::vector<std::vector<double>> vecs;
        bool ok = !collection[p].empty();
        for (const auto& w : collection[p]) {
            const auto id = table.find(w);
            if (!id) {
                ok = false;
                break;
            }
            vecs.emplace_back(table.vec(*id).begin(), table.vec(*id).end());
        }
        if (!ok) continue;
        const auto mean = compose_phrase(vecs);
        scored.push_back({p, cosine(query, mean)});
    }
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                      [](const ScoredPhrase& a, const ScoredPhrase& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.index < b.index;
                      });
    scored.resize(take);
    return scored;
}

}  // namespace phrasevec
