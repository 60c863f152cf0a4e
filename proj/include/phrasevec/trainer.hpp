#pragma once

// Joint SGD over the reconstruction and ranking objectives. Each step takes
// one phrase: every constituent word is a reconstruction example, the
// composed phrase vector is ranked against freshly sampled negatives, and
// the combined gradient (all of it evaluated at the pre-step weights) is
// applied as theta <- theta - lr * (grad_rec + lambda_rank * grad_rank).
// The decoder only ever sees reconstruction gradients.
//
// Deterministic by default: one seeded rng drives initialization, shuffles
// and negative sampling, so identical inputs give bit-identical models.
// The opt-in multi-threaded mode applies unsynchronized sparse updates and
// forfeits that guarantee.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "phrasevec/cooc.hpp"
#include "phrasevec/model.hpp"
#include "phrasevec/phrases.hpp"

namespace phrasevec {

struct TrainConfig {
    std::uint32_t dim = 100;
    double learning_rate = 0.01;
    double lambda_rank = 1.0;   // weight of the ranking objective
    std::uint32_t negatives = 10;
    std::uint32_t epochs = 5;
    std::uint64_t seed = 1;
    bool shuffle = true;
    std::uint32_t checkpoint_interval = 0;  // epochs between checkpoints; 0 = final only
    // One pure-reconstruction pass over every word with context counts, so
    // words outside any phrase still get usable embeddings. Runs before the
    // phrase epochs; set to 0 for strict phrase-only training.
    std::uint32_t pretrain_epochs = 1;
    bool weight_by_count = false;  // sample phrases by corpus frequency
    std::uint32_t threads = 1;

    void validate() const;
};

struct EpochStats {
    std::int32_t epoch = 0;  // 0 = pre-training pass, 1.. = phrase epochs
    double mean_rec_loss = 0.0;
    double mean_rank_loss = 0.0;
    double seconds = 0.0;
    double examples_per_sec = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
};

// Entries i.i.d. uniform in [-1/sqrt(|D|), +1/sqrt(|D|)].
Model init_model(std::uint64_t seed, std::uint32_t m, std::uint32_t d);

struct StepLosses {
    double rec = 0.0;
    double rank = 0.0;
};

// One joint step on one phrase. rows_by_word holds the sqrt context rows
// indexed by word id (dim == 0 marks a word without counts);
// eligible_words lists the ids negatives may be drawn from.
StepLosses train_step(Model& model, std::span<const std::uint32_t> phrase_word_ids,
                      const std::vector<SqrtDistribution>& rows_by_word,
                      std::span<const std::uint32_t> eligible_words,
                      const TrainConfig& config, std::mt19937_64& rng);

// Pure reconstruction epochs over the given rows (the pre-training pass and
// the lambda = 0 path share this). Returns the mean loss of the last epoch.
double run_reconstruction_epochs(Model& model, const std::vector<SqrtDistribution>& rows_by_word,
                                 std::span<const std::uint32_t> word_ids, std::uint32_t epochs,
                                 double learning_rate, bool shuffle, std::mt19937_64& rng);

using EpochCallback = std::function<void(const Model&, const EpochStats&)>;

// Full training loop over corpus artifacts. Phrases whose words lack
// context counts must already have been filtered out (load_phrases does).
std::pair<Model, TrainReport> train(const CoocMatrix& cooc, const Vocabulary& vocab,
                                    const PhraseSet& phrases, const TrainConfig& config,
                                    const EpochCallback& on_epoch = nullptr);

}  // namespace phrasevec
