#include "phrasevec/cooc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "phrasevec/io.hpp"
#include "phrasevec/simd.hpp"

namespace phrasevec {

double SqrtDistribution::l2_norm() const {
    return std::sqrt(simd::sumsq(vals.data(), vals.size()));
}

std::span<const std::uint32_t> CoocMatrix::row_cols(std::uint32_t w) const {
    return {col_ids.data() + row_ptr[w], static_cast<std::size_t>(row_ptr[w + 1] - row_ptr[w])};
}

std::span<const std::uint32_t> CoocMatrix::row_counts(std::uint32_t w) const {
    return {counts.data() + row_ptr[w], static_cast<std::size_t>(row_ptr[w + 1] - row_ptr[w])};
}

std::vector<std::uint32_t> CoocMatrix::empty_rows() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t w = 0; w < num_rows; ++w) {
        if (row_empty(w)) out.push_back(w);
    }
    return out;
}

CoocCounter::CoocCounter(const Vocabulary& vocab, std::uint32_t window,
                         std::size_t flush_block)
    : vocab_(vocab), window_(window), flush_block_(flush_block) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (vocab.context_size == 0) throw std::invalid_argument("vocabulary has no context words");
}

void CoocCounter::bump(std::uint32_t center, std::uint32_t context) {
    const std::uint64_t key = (static_cast<std::uint64_t>(center) << 32) | context;
    std::uint32_t& cell = cells_[key];
    if (cell == std::numeric_limits<std::uint32_t>::max())
        throw std::runtime_error("co-occurrence count overflow for word id " +
                                 std::to_string(center));
    ++cell;
}

void CoocCounter::flush_centers(std::size_t upto) {
    // Processes centers [next_center_, upto); every needed neighbor is in buf_.
    const std::size_t n = buf_.size();
    for (std::size_t t = next_center_; t < upto; ++t) {
        const std::int64_t center = buf_[t];
        if (center < 0) continue;
        const std::size_t lo = t >= window_ ? t - window_ : 0;
        const std::size_t hi = std::min(n, t + window_ + 1);
        for (std::size_t u = lo; u < hi; ++u) {
            if (u == t) continue;
            const std::int64_t ctx = buf_[u];
            if (ctx >= 0 && static_cast<std::uint32_t>(ctx) < vocab_.context_size) {
                bump(static_cast<std::uint32_t>(center), static_cast<std::uint32_t>(ctx));
            }
        }
    }
    next_center_ = upto;
}

void CoocCounter::add_token(std::string_view token) {
    const auto id = vocab_.id_of(token);
    buf_.push_back(id ? static_cast<std::int64_t>(*id) : -1);
    if (buf_.size() >= flush_block_ + window_ && next_center_ + 2 * window_ < buf_.size()) {
        // Centers up to size-window have their full right context available.
        flush_centers(buf_.size() - window_);
        // Keep the last 2*window tokens: left context for pending centers.
        const std::size_t keep_from = next_center_ >= window_ ? next_center_ - window_ : 0;
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(keep_from));
        next_center_ -= keep_from;
    }
}

void CoocCounter::end_document() {
    flush_centers(buf_.size());
    buf_.clear();
    next_center_ = 0;
}

void CoocCounter::add_document(std::span<const std::string> tokens) {
    for (const auto& tok : tokens) add_token(tok);
    end_document();
}

void CoocCounter::merge(const CoocCounter& other) {
    if (other.window_ != window_)
        throw std::invalid_argument("cannot merge counters with different windows");
    if (!other.buf_.empty())
        throw std::logic_error("merge source has an unfinished document");
    for (const auto& [key, count] : other.cells_) {
        std::uint32_t& cell = cells_[key];
        const std::uint64_t sum = static_cast<std::uint64_t>(cell) + count;
        if (sum > std::numeric_limits<std::uint32_t>::max())
            throw std::runtime_error("co-occurrence count overflow during merge");
        cell = static_cast<std::uint32_t>(sum);
    }
}

CoocMatrix CoocCounter::finalize() {
    end_document();
    std::vector<std::pair<std::uint64_t, std::uint32_t>> cells(cells_.begin(), cells_.end());
    std::sort(cells.begin(), cells.end());

    CoocMatrix m;
    m.num_rows = vocab_.size();
    m.num_cols = vocab_.context_size;
    m.window = window_;
    m.row_ptr.assign(m.num_rows + 1, 0);
    m.col_ids.reserve(cells.size());
    m.counts.reserve(cells.size());
    m.row_totals.assign(m.num_rows, 0);
    for (const auto& [key, count] : cells) {
        const auto w = static_cast<std::uint32_t>(key >> 32);
        const auto c = static_cast<std::uint32_t>(key & 0xffffffffu);
        ++m.row_ptr[w + 1];
        m.col_ids.push_back(c);
        m.counts.push_back(count);
        m.row_totals[w] += count;
    }
    for (std::uint32_t w = 0; w < m.num_rows; ++w) m.row_ptr[w + 1] += m.row_ptr[w];
    return m;
}

SparseVector row_distribution(const CoocMatrix& cooc, std::uint32_t w) {
    if (w >= cooc.num_rows) throw std::out_of_range("word id out of range");
    if (cooc.row_empty(w))
        throw std::runtime_error("word has no context counts (id " + std::to_string(w) + ")");
    SparseVector p;
    p.dim = cooc.num_cols;
    const auto cols = cooc.row_cols(w);
    const auto counts = cooc.row_counts(w);
    const double total = static_cast<double>(cooc.row_total(w));
    p.ids.assign(cols.begin(), cols.end());
    p.vals.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        p.vals[i] = static_cast<double>(counts[i]) / total;
    }
    return p;
}

SqrtDistribution sqrt_transform(const SparseVector& prob) {
    SqrtDistribution s;
    s.dim = prob.dim;
    s.ids = prob.ids;
    s.vals.resize(prob.vals.size());
    for (std::size_t i = 0; i < prob.vals.size(); ++i) {
        if (prob.vals[i] < 0.0)
            throw std::invalid_argument("negative probability entry");
        s.vals[i] = std::sqrt(prob.vals[i]);
    }
    return s;
}

SqrtDistribution sqrt_row(const CoocMatrix& cooc, std::uint32_t w) {
    return sqrt_transform(row_distribution(cooc, w));
}

std::vector<SqrtDistribution> all_sqrt_rows(const CoocMatrix& cooc) {
    std::vector<SqrtDistribution> rows(cooc.num_rows);
    for (std::uint32_t w = 0; w < cooc.num_rows; ++w) {
        if (!cooc.row_empty(w)) rows[w] = sqrt_row(cooc, w);
    }
    return rows;
}

double hellinger_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("hellinger_distance: dimension mismatch");
    // Norm-of-difference form over the square-root vectors.
    std::vector<double> diff(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0)
            throw std::invalid_argument("hellinger_distance: negative entry");
        diff[i] = std::sqrt(p[i]) - std::sqrt(q[i]);
    }
    return std::sqrt(simd::sumsq(diff.data(), diff.size())) / std::sqrt(2.0);
}

SparseVector collect_phrase_context_counts(std::span<const std::vector<std::string>> documents,
                                           const Vocabulary& vocab,
                                           std::span<const std::uint32_t> phrase_ids,
                                           std::uint32_t window) {
    if (phrase_ids.empty()) throw std::invalid_argument("empty phrase");
    std::unordered_map<std::uint32_t, std::uint64_t> counts;
    const std::size_t T = phrase_ids.size();
    std::size_t occurrences = 0;
    for (const auto& tokens : documents) {
        std::vector<std::int64_t> ids(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto id = vocab.id_of(tokens[i]);
            ids[i] = id ? static_cast<std::int64_t>(*id) : -1;
        }
        for (std::size_t t = 0; t + T <= ids.size(); ++t) {
            bool match = true;
            for (std::size_t k = 0; k < T; ++k) {
                if (ids[t + k] != static_cast<std::int64_t>(phrase_ids[k])) { match = false; break; }
            }
            if (!match) continue;
            ++occurrences;
            const std::size_t lo = t >= window ? t - window : 0;
            const std::size_t hi = std::min(ids.size(), t + T + window);
            for (std::size_t u = lo; u < hi; ++u) {
                if (u >= t && u < t + T) continue;  // the phrase itself
                const std::int64_t ctx = ids[u];
                if (ctx >= 0 && static_cast<std::uint32_t>(ctx) < vocab.context_size) {
                    ++counts[static_cast<std::uint32_t>(ctx)];
                }
            }
        }
    }
    if (occurrences == 0)
        throw std::runtime_error("phrase does not occur in the corpus");
    std::vector<std::pair<std::uint32_t, std::uint64_t>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    SparseVector out;
    out.dim = vocab.context_size;
    for (const auto& [c, n] : sorted) {
        out.ids.push_back(c);
        out.vals.push_back(static_cast<double>(n));
    }
    return out;
}

void write_cooc(const std::string& path, const CoocMatrix& cooc) {
    std::string out = "#rows=" + std::to_string(cooc.num_rows) +
                      " cols=" + std::to_string(cooc.num_cols) +
                      " window=" + std::to_string(cooc.window) + "\n";
    for (std::uint32_t w = 0; w < cooc.num_rows; ++w) {
        const auto cols = cooc.row_cols(w);
        const auto counts = cooc.row_counts(w);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            out += std::to_string(w);
            out += ' ';
            out += std::to_string(cols[i]);
            out += ' ';
            out += std::to_string(counts[i]);
            out += '\n';
        }
    }
    atomic_write_file(path, out);
}

CoocMatrix read_cooc(const std::string& path) {
    const std::string text = read_file(path);
    CoocMatrix m;
    std::size_t pos = 0;
    bool have_header = false;
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> triplets;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!have_header) {
            const auto fields = split_ws(line);
            if (fields.size() != 3 || fields[0].rfind("#rows=", 0) != 0 ||
                fields[1].rfind("cols=", 0) != 0 || fields[2].rfind("window=", 0) != 0)
                throw std::runtime_error(path + ": malformed co-occurrence header");
            m.num_rows = static_cast<std::uint32_t>(parse_u64(fields[0].substr(6), path));
            m.num_cols = static_cast<std::uint32_t>(parse_u64(fields[1].substr(5), path));
            m.window = static_cast<std::uint32_t>(parse_u64(fields[2].substr(7), path));
            have_header = true;
            continue;
        }
        const auto fields = split_ws(line);
        if (fields.size() != 3)
            throw std::runtime_error(path + ": expected 3 fields on line " +
                                     std::to_string(line_no));
        const auto w = parse_u64(fields[0], path);
        const auto c = parse_u64(fields[1], path);
        const auto n = parse_u64(fields[2], path);
        if (w >= m.num_rows || c >= m.num_cols || n == 0 ||
            n > std::numeric_limits<std::uint32_t>::max())
            throw std::runtime_error(path + ": invalid triplet on line " + std::to_string(line_no));
        triplets.emplace_back(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(c),
                              static_cast<std::uint32_t>(n));
    }
    if (!have_header) throw std::runtime_error(path + ": missing co-occurrence header");
    if (!std::is_sorted(triplets.begin(), triplets.end(),
                        [](const auto& a, const auto& b) {
                            return std::pair(std::get<0>(a), std::get<1>(a)) <
                                   std::pair(std::get<0>(b), std::get<1>(b));
                        }))
        throw std::runtime_error(path + ": triplets not sorted by (word_id, context_id)");
    m.row_ptr.assign(m.num_rows + 1, 0);
    m.row_totals.assign(m.num_rows, 0);
    m.col_ids.reserve(triplets.size());
    m.counts.reserve(triplets.size());
    for (const auto& [w, c, n] : triplets) {
        ++m.row_ptr[w + 1];
        m.col_ids.push_back(c);
        m.counts.push_back(n);
        m.row_totals[w] += n;
    }
    for (std::uint32_t w = 0; w < m.num_rows; ++w) m.row_ptr[w + 1] += m.row_ptr[w];
    return m;
}

}  // namespace phrasevec
