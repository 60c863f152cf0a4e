#include "phrasevec/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "phrasevec/simd.hpp"

namespace phrasevec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// [0, 1) from the top 53 bits; std::uniform_real_distribution is not
// portable across standard libraries.
double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t bounded_u64(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[bounded_u64(rng, i)]);
    }
}

const SqrtDistribution& row_or_throw(const std::vector<SqrtDistribution>& rows,
                                     std::uint32_t word_id) {
    if (word_id >= rows.size() || rows[word_id].dim == 0)
        throw std::runtime_error("word id " + std::to_string(word_id) +
                                 " has no context counts; cannot encode");
    return rows[word_id];
}

void apply_reconstruction(Model& model, const SqrtDistribution& input, const ReconGrads& g,
                          double lr) {
    // decoder -= lr * 2 * residual * code^T ; encoder -= lr * code_grad * v^T
    const std::size_t m = model.dim();
    for (std::uint32_t i = 0; i < model.input_dim(); ++i) {
        if (g.residual[i] != 0.0) {
            simd::axpy(-2.0 * lr * g.residual[i], g.code.data(), model.dec_row(i).data(), m);
        }
    }
    for (std::size_t k = 0; k < input.ids.size(); ++k) {
        simd::axpy(-lr * input.vals[k], g.code_grad.data(), model.enc_col(input.ids[k]).data(), m);
    }
}

void apply_vector_grad_to_encoder(Model& model, const SqrtDistribution& input,
                                  std::span<const double> vec_grad, double scale) {
    for (std::size_t k = 0; k < input.ids.size(); ++k) {
        simd::axpy(scale * input.vals[k], vec_grad.data(), model.enc_col(input.ids[k]).data(),
                   model.dim());
    }
}

void check_finite(const StepLosses& losses, double lr) {
    if (!std::isfinite(losses.rec) || !std::isfinite(losses.rank))
        throw std::runtime_error(
            "non-finite training loss (rec=" + std::to_string(losses.rec) +
            ", rank=" + std::to_string(losses.rank) +
            "); the learning rate " + std::to_string(lr) + " is likely too high");
}

}  // namespace

void TrainConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (!std::isfinite(learning_rate) || learning_rate < 0.0)
        throw std::invalid_argument("learning_rate must be finite and >= 0");
    if (lambda_rank < 0.0) throw std::invalid_argument("lambda_rank must be >= 0");
    if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

Model init_model(std::uint64_t seed, std::uint32_t m, std::uint32_t d) {
    if (m > d)
        throw std::invalid_argument("embedding dimension " + std::to_string(m) +
                                    " exceeds input dimension " + std::to_string(d));
    Model model(m, d);
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::uint32_t j = 0; j < d; ++j) {
        auto col = model.enc_col(j);
        for (auto& v : col) v = (2.0 * unit_double(rng) - 1.0) * bound;
    }
    for (std::uint32_t i = 0; i < d; ++i) {
        auto row = model.dec_row(i);
        for (auto& v : row) v = (2.0 * unit_double(rng) - 1.0) * bound;
    }
    return model;
}

StepLosses train_step(Model& model, std::span<const std::uint32_t> phrase_word_ids,
                      const std::vector<SqrtDistribution>& rows_by_word,
                      std::span<const std::uint32_t> eligible_words,
                      const TrainConfig& config, std::mt19937_64& rng) {
    if (phrase_word_ids.empty()) throw std::invalid_argument("empty phrase");
    const std::size_t T = phrase_word_ids.size();

    // Everything below is evaluated at the pre-step weights; updates are
    // applied only after all gradients exist.
    std::vector<ReconGrads> rec(T);
    std::vector<std::vector<double>> codes(T);
    StepLosses losses;
    for (std::size_t t = 0; t < T; ++t) {
        rec[t] = reconstruction_loss_and_grads(model, row_or_throw(rows_by_word,
                                                                   phrase_word_ids[t]));
        codes[t] = rec[t].code;
        losses.rec += rec[t].loss;
    }

    // Negatives come from the eligible pool minus the phrase itself.
    std::vector<std::uint32_t> excluded;
    for (const auto id : phrase_word_ids) {
        const auto it = std::lower_bound(eligible_words.begin(), eligible_words.end(), id);
        if (it != eligible_words.end() && *it == id)
            excluded.push_back(static_cast<std::uint32_t>(it - eligible_words.begin()));
    }
    const std::vector<std::uint32_t> neg_pool_idx = sample_negatives(
        rng, static_cast<std::uint32_t>(eligible_words.size()), excluded, config.negatives);
    std::vector<std::uint32_t> neg_ids(neg_pool_idx.size());
    for (std::size_t i = 0; i < neg_pool_idx.size(); ++i)
        neg_ids[i] = eligible_words[neg_pool_idx[i]];

    std::vector<std::vector<double>> neg_codes(neg_ids.size());
    for (std::size_t i = 0; i < neg_ids.size(); ++i) {
        neg_codes[i] = encode(model, rows_by_word[neg_ids[i]]);
    }
    const RankingGrads rank = ranking_loss_and_grads(codes, neg_codes);
    losses.rank = rank.loss;
    check_finite(losses, config.learning_rate);

    const double lr = config.learning_rate;
    if (lr == 0.0) return losses;

    for (std::size_t t = 0; t < T; ++t) {
        apply_reconstruction(model, rows_by_word[phrase_word_ids[t]], rec[t], lr);
    }
    if (config.lambda_rank > 0.0) {
        const double s = -lr * config.lambda_rank;
        for (std::size_t t = 0; t < T; ++t) {
            apply_vector_grad_to_encoder(model, rows_by_word[phrase_word_ids[t]],
                                         rank.phrase_grads[t], s);
        }
        for (std::size_t i = 0; i < neg_ids.size(); ++i) {
            apply_vector_grad_to_encoder(model, rows_by_word[neg_ids[i]], rank.negative_grads[i],
                                         s);
        }
    }
    return losses;
}

double run_reconstruction_epochs(Model& model, const std::vector<SqrtDistribution>& rows_by_word,
                                 std::span<const std::uint32_t> word_ids, std::uint32_t epochs,
                                 double learning_rate, bool shuffle, std::mt19937_64& rng) {
    if (word_ids.empty()) throw std::invalid_argument("no words to reconstruct");
    std::vector<std::uint32_t> order(word_ids.begin(), word_ids.end());
    double mean_loss = 0.0;
    for (std::uint32_t e = 0; e < epochs; ++e) {
        if (shuffle) seeded_shuffle(order, rng);
        double sum = 0.0;
        for (const auto id : order) {
            const SqrtDistribution& row = row_or_throw(rows_by_word, id);
            const ReconGrads g = reconstruction_loss_and_grads(model, row);
            if (!std::isfinite(g.loss))
                throw std::runtime_error("non-finite reconstruction loss; lower the learning rate");
            sum += g.loss;
            if (learning_rate != 0.0) apply_reconstruction(model, row, g, learning_rate);
        }
        mean_loss = sum / static_cast<double>(order.size());
    }
    return mean_loss;
}

std::pair<Model, TrainReport> train(const CoocMatrix& cooc, const Vocabulary& vocab,
                                    const PhraseSet& phrases, const TrainConfig& config,
                                    const EpochCallback& on_epoch) {
    config.validate();
    if (cooc.num_rows != vocab.size() || cooc.num_cols != vocab.context_size)
        throw std::invalid_argument("co-occurrence matrix does not match the vocabulary");
    if (phrases.phrases.empty()) throw std::invalid_argument("empty phrase set");

    Model model = init_model(config.seed, config.dim, cooc.num_cols);
    TrainReport report;
    if (config.epochs == 0) return {std::move(model), std::move(report)};

    const std::vector<SqrtDistribution> rows = all_sqrt_rows(cooc);
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t w = 0; w < cooc.num_rows; ++w) {
        if (rows[w].dim != 0) eligible.push_back(w);
    }
    if (eligible.empty()) throw std::runtime_error("every word has an empty co-occurrence row");

    std::mt19937_64 rng(splitmix64(config.seed));

    using clock = std::chrono::steady_clock;
    if (config.pretrain_epochs > 0) {
        for (std::uint32_t e = 0; e < config.pretrain_epochs; ++e) {
            const auto t0 = clock::now();
            const double mean = run_reconstruction_epochs(model, rows, eligible, 1,
                                                          config.learning_rate, config.shuffle,
                                                          rng);
            const double secs = std::chrono::duration<double>(clock::now() - t0).count();
            EpochStats stats;
            // Pre-training rows count down to 0 so phrase epochs start at 1.
            stats.epoch = static_cast<std::int32_t>(e) -
                          static_cast<std::int32_t>(config.pretrain_epochs) + 1;
            stats.mean_rec_loss = mean;
            stats.mean_rank_loss = 0.0;
            stats.seconds = secs;
            stats.examples_per_sec = secs > 0 ? static_cast<double>(eligible.size()) / secs : 0.0;
            report.epochs.push_back(stats);
            if (on_epoch) on_epoch(model, stats);
        }
    }

    std::vector<std::size_t> order(phrases.size());
    std::vector<std::uint64_t> count_cumsum;
    std::uint64_t count_total = 0;
    if (config.weight_by_count) {
        count_cumsum.reserve(phrases.size());
        for (const auto& p : phrases.phrases) {
            count_total += p.count;
            count_cumsum.push_back(count_total);
        }
    }

    for (std::uint32_t e = 1; e <= config.epochs; ++e) {
        if (config.weight_by_count) {
            for (auto& idx : order) {
                const std::uint64_t r = bounded_u64(rng, count_total);
                idx = static_cast<std::size_t>(
                    std::upper_bound(count_cumsum.begin(), count_cumsum.end(), r) -
                    count_cumsum.begin());
            }
        } else {
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            if (config.shuffle) seeded_shuffle(order, rng);
        }

        const auto t0 = clock::now();
        double rec_sum = 0.0, rank_sum = 0.0;
        if (config.threads <= 1) {
            for (const auto idx : order) {
                const StepLosses losses = train_step(model, phrases.phrases[idx].word_ids, rows,
                                                     eligible, config, rng);
                rec_sum += losses.rec;
                rank_sum += losses.rank;
            }
        } else {
            // Hogwild-style workers: unsynchronized sparse updates on the
            // shared model, no determinism guarantee.
            const std::size_t n_threads = std::min<std::size_t>(config.threads, order.size());
            std::vector<double> recs(n_threads, 0.0), ranks(n_threads, 0.0);
            std::vector<std::thread> workers;
            std::exception_ptr first_error;
            std::mutex error_mutex;
            const std::size_t chunk = (order.size() + n_threads - 1) / n_threads;
            for (std::size_t t = 0; t < n_threads; ++t) {
                workers.emplace_back([&, t]() {
                    std::mt19937_64 local_rng(splitmix64(config.seed ^ (e * 1000003ULL + t)));
                    const std::size_t lo = t * chunk;
                    const std::size_t hi = std::min(order.size(), lo + chunk);
                    try {
                        for (std::size_t i = lo; i < hi; ++i) {
                            const StepLosses losses =
                                train_step(model, phrases.phrases[order[i]].word_ids, rows,
                                           eligible, config, local_rng);
                            recs[t] += losses.rec;
                            ranks[t] += losses.rank;
                        }
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            if (first_error) std::rethrow_exception(first_error);
            for (std::size_t t = 0; t < n_threads; ++t) {
                rec_sum += recs[t];
                rank_sum += ranks[t];
            }
        }
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();

        EpochStats stats;
        stats.epoch = static_cast<std::int32_t>(e);
        stats.mean_rec_loss = rec_sum / static_cast<double>(order.size());
        stats.mean_rank_loss = rank_sum / static_cast<double>(order.size());
        stats.seconds = secs;
        stats.examples_per_sec = secs > 0 ? static_cast<double>(order.size()) / secs : 0.0;
        report.epochs.push_back(stats);
        if (on_epoch) on_epoch(model, stats);
    }
    return {std::move(model), std::move(report)};
}

}  // namespace phrasevec
