// phrasevec command-line front end: wires corpus -> vocabulary ->
// co-occurrence -> training / SVD -> evaluation into reproducible runs.
// Every subcommand prints a TSV result block on stdout and writes a JSON
// run manifest next to its primary output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phrasevec/cooc.hpp"
#include "phrasevec/corpus.hpp"
#include "phrasevec/eval.hpp"
#include "phrasevec/io.hpp"
#include "phrasevec/model.hpp"
#include "phrasevec/phrases.hpp"
#include "phrasevec/simd.hpp"
#include "phrasevec/svd.hpp"
#include "phrasevec/trainer.hpp"

namespace pv = phrasevec;

namespace {

std::string hex_digest(std::uint64_t d) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

// One input file = one document; "-" reads standard input.
std::vector<std::vector<std::string>> read_corpus_documents(const std::vector<std::string>& paths) {
    std::vector<std::vector<std::string>> docs;
    for (const auto& path : paths) {
        std::vector<std::string> tokens;
        if (path == "-") {
            pv::tokenize_stream(std::cin, [&](std::string&& tok) { tokens.push_back(std::move(tok)); });
        } else {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open corpus file " + path);
            pv::tokenize_stream(in, [&](std::string&& tok) { tokens.push_back(std::move(tok)); });
        }
        docs.push_back(std::move(tokens));
    }
    return docs;
}

void add_input_digests(pv::RunManifest& manifest, const std::vector<std::string>& paths) {
    for (const auto& path : paths) {
        if (path == "-") {
            manifest.input_digests["<stdin>"] = "-";
        } else {
            manifest.input_digests[path] = hex_digest(pv::fnv1a64_file(path));
        }
    }
}

pv::RunManifest make_manifest(const std::string& subcommand, std::uint64_t seed) {
    pv::RunManifest m;
    m.subcommand = subcommand;
    m.tool_version = std::string(pv::kToolVersion);
    m.seed = seed;
    m.simd_level = pv::simd::level_name(pv::simd::active_level());
    return m;
}

std::vector<bool> nonempty_row_mask(const pv::CoocMatrix& cooc) {
    std::vector<bool> mask(cooc.num_rows, false);
    for (std::uint32_t w = 0; w < cooc.num_rows; ++w) mask[w] = !cooc.row_empty(w);
    return mask;
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// ---------------------------------------------------------------- vocab --

struct VocabArgs {
    std::vector<std::string> corpus;
    std::uint64_t min_count = 100;
    std::uint32_t context_size = 10000;
    std::string out;
    std::uint32_t threads = 1;
};

int run_vocab(const VocabArgs& args) {
    const auto docs = read_corpus_documents(args.corpus);
    pv::VocabCounter counter;
    if (args.threads <= 1 || docs.size() <= 1) {
        for (const auto& doc : docs) {
            for (const auto& tok : doc) counter.add(tok);
        }
    } else {
        const std::size_t n_threads = std::min<std::size_t>(args.threads, docs.size());
        std::vector<pv::VocabCounter> shards(n_threads);
        std::vector<std::future<void>> futures;
        for (std::size_t t = 0; t < n_threads; ++t) {
            futures.push_back(std::async(std::launch::async, [&, t]() {
                for (std::size_t i = t; i < docs.size(); i += n_threads) {
                    for (const auto& tok : docs[i]) shards[t].add(tok);
                }
            }));
        }
        for (auto& f : futures) f.get();
        for (const auto& shard : shards) counter.merge(shard);
    }
    const pv::Vocabulary vocab = counter.build(args.min_count, args.context_size);
    pv::write_vocabulary(args.out, vocab);

    auto manifest = make_manifest("vocab", 0);
    add_input_digests(manifest, args.corpus);
    manifest.config = {{"min_count", std::to_string(args.min_count)},
                       {"context_size", std::to_string(args.context_size)},
                       {"out", args.out}};
    pv::write_run_manifest(args.out + ".manifest.json", manifest);

    std::cout << "words\t" << vocab.size() << "\n"
              << "context\t" << vocab.context_size << "\n"
              << "tokens\t" << counter.total_tokens() << "\n"
              << "out\t" << args.out << "\n";
    return 0;
}

// ----------------------------------------------------------------- cooc --

struct CoocArgs {
    std::vector<std::string> corpus;
    std::string vocab;
    std::uint32_t window = 10;
    std::string out;
    std::uint32_t threads = 1;
};

int run_cooc(const CoocArgs& args) {
    const pv::Vocabulary vocab = pv::read_vocabulary(args.vocab);
    if (vocab.size() == 0 || vocab.context_size == 0)
        throw std::runtime_error("vocabulary is empty");
    const auto docs = read_corpus_documents(args.corpus);

    pv::CoocCounter counter(vocab, args.window);
    if (args.threads <= 1 || docs.size() <= 1) {
        for (const auto& doc : docs) counter.add_document(doc);
    } else {
        const std::size_t n_threads = std::min<std::size_t>(args.threads, docs.size());
        std::vector<pv::CoocCounter> shards;
        shards.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) shards.emplace_back(vocab, args.window);
        std::vector<std::future<void>> futures;
        for (std::size_t t = 0; t < n_threads; ++t) {
            futures.push_back(std::async(std::launch::async, [&, t]() {
                for (std::size_t i = t; i < docs.size(); i += n_threads) {
                    shards[t].add_document(docs[i]);
                }
            }));
        }
        for (auto& f : futures) f.get();
        for (auto& shard : shards) counter.merge(shard);
    }
    const pv::CoocMatrix cooc = counter.finalize();
    pv::write_cooc(args.out, cooc);

    auto manifest = make_manifest("cooc", 0);
    add_input_digests(manifest, args.corpus);
    manifest.input_digests[args.vocab] = hex_digest(pv::fnv1a64_file(args.vocab));
    manifest.config = {{"window", std::to_string(args.window)}, {"out", args.out}};
    pv::write_run_manifest(args.out + ".manifest.json", manifest);

    const auto empty = cooc.empty_rows();
    std::cout << "rows\t" << cooc.num_rows << "\n"
              << "cols\t" << cooc.num_cols << "\n"
              << "window\t" << cooc.window << "\n"
              << "nnz\t" << cooc.col_ids.size() << "\n"
              << "empty_rows\t" << empty.size() << "\n"
              << "out\t" << args.out << "\n";
    if (!empty.empty()) {
        std::cerr << "note: " << empty.size()
                  << " word(s) have no context counts and will be excluded from training\n";
    }
    return 0;
}

// ---------------------------------------------------------------- train --

struct TrainArgs {
    std::string cooc, vocab, phrases;
    std::string out;
    std::string emb_out, log_out;
    std::string config_file;
    std::uint64_t min_phrase_count = 10;
    bool timing_in_log = false;
    pv::TrainConfig config;
    // flags seen on the command line (override the config file)
    std::map<std::string, bool> given;
};

void apply_config_file(pv::TrainConfig& config, const std::string& path,
                       const std::map<std::string, bool>& given) {
    const std::string text = pv::read_file(path);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": expected key=value, got '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (given.count(key) && given.at(key)) continue;  // explicit flag wins
        if (key == "dim") config.dim = static_cast<std::uint32_t>(pv::parse_u64(value, key));
        else if (key == "learning_rate" || key == "lr") config.learning_rate = pv::parse_double(value, key);
        else if (key == "lambda" || key == "lambda_rank") config.lambda_rank = pv::parse_double(value, key);
        else if (key == "negatives") config.negatives = static_cast<std::uint32_t>(pv::parse_u64(value, key));
        else if (key == "epochs") config.epochs = static_cast<std::uint32_t>(pv::parse_u64(value, key));
        else if (key == "seed") config.seed = pv::parse_u64(value, key);
        else if (key == "shuffle") config.shuffle = value == "1" || value == "true";
        else if (key == "checkpoint_interval") config.checkpoint_interval = static_cast<std::uint32_t>(pv::parse_u64(value, key));
        else if (key == "pretrain_epochs") config.pretrain_epochs = static_cast<std::uint32_t>(pv::parse_u64(value, key));
        else if (key == "weight_by_count") config.weight_by_count = value == "1" || value == "true";
        else if (key == "threads") config.threads = static_cast<std::uint32_t>(pv::parse_u64(value, key));
        else throw std::runtime_error(path + ": unknown config key '" + key + "'");
    }
}

int run_train(TrainArgs& args) {
    if (!args.config_file.empty()) apply_config_file(args.config, args.config_file, args.given);
    if (args.emb_out.empty()) args.emb_out = args.out + ".emb";
    if (args.log_out.empty()) args.log_out = args.out + ".log";

    const pv::Vocabulary vocab = pv::read_vocabulary(args.vocab);
    const pv::CoocMatrix cooc = pv::read_cooc(args.cooc);
    const auto mask = nonempty_row_mask(cooc);
    pv::PhraseLoadReport phrase_report;
    const pv::PhraseSet phrase_set =
        pv::load_phrases(args.phrases, vocab, &mask, args.min_phrase_count, &phrase_report);

    const bool deterministic = args.config.threads <= 1;
    if (!deterministic)
        std::cerr << "note: --threads > 1 applies unsynchronized updates; "
                     "the run is not bit-reproducible\n";

    // Line-oriented TSV log. In deterministic mode wall time is reported on
    // stderr only, keeping the log byte-stable across reruns.
    std::string log = "#epoch\trec_loss\trank_loss\tseconds\n";
    const bool log_timing = args.timing_in_log || !deterministic;
    std::uint32_t epochs_done = 0;
    const auto on_epoch = [&](const pv::Model& model, const pv::EpochStats& stats) {
        log += std::to_string(stats.epoch);
        log += '\t';
        log += pv::format_double(stats.mean_rec_loss);
        log += '\t';
        log += pv::format_double(stats.mean_rank_loss);
        log += '\t';
        log += log_timing ? format_fixed(stats.seconds, 3) : std::string("0.000");
        log += '\n';
        std::cerr << "epoch " << stats.epoch << ": rec=" << stats.mean_rec_loss
                  << " rank=" << stats.mean_rank_loss << " (" << format_fixed(stats.seconds, 2)
                  << "s, " << format_fixed(stats.examples_per_sec, 0) << " ex/s)\n";
        if (stats.epoch > 0) {
            ++epochs_done;
            if (args.config.checkpoint_interval > 0 &&
                epochs_done % args.config.checkpoint_interval == 0 &&
                epochs_done < args.config.epochs) {
                pv::save_checkpoint(args.out + ".epoch" + std::to_string(stats.epoch), model,
                                    args.vocab);
            }
        }
    };

    auto [model, report] = pv::train(cooc, vocab, phrase_set, args.config, on_epoch);
    if (!model.all_finite()) throw std::runtime_error("trained model contains non-finite weights");

    pv::save_checkpoint(args.out, model, args.vocab);
    const pv::EmbeddingTable table = pv::table_from_model(model, cooc, vocab);
    pv::write_embeddings(args.emb_out, table);
    pv::atomic_write_file(args.log_out, log);

    auto manifest = make_manifest("train", args.config.seed);
    manifest.input_digests[args.cooc] = hex_digest(pv::fnv1a64_file(args.cooc));
    manifest.input_digests[args.vocab] = hex_digest(pv::fnv1a64_file(args.vocab));
    manifest.input_digests[args.phrases] = hex_digest(pv::fnv1a64_file(args.phrases));
    manifest.config = {{"dim", std::to_string(args.config.dim)},
                       {"learning_rate", pv::format_double(args.config.learning_rate)},
                       {"lambda", pv::format_double(args.config.lambda_rank)},
                       {"negatives", std::to_string(args.config.negatives)},
                       {"epochs", std::to_string(args.config.epochs)},
                       {"shuffle", args.config.shuffle ? "1" : "0"},
                       {"pretrain_epochs", std::to_string(args.config.pretrain_epochs)},
                       {"weight_by_count", args.config.weight_by_count ? "1" : "0"},
                       {"threads", std::to_string(args.config.threads)},
                       {"min_phrase_count", std::to_string(args.min_phrase_count)},
                       {"out", args.out},
                       {"emb_out", args.emb_out},
                       {"log_out", args.log_out}};
    pv::write_run_manifest(args.out + ".manifest.json", manifest);

    std::cout << "phrases\t" << phrase_set.size() << "\n"
              << "phrases_dropped_oov\t" << phrase_report.dropped_oov << "\n"
              << "phrases_dropped_no_counts\t" << phrase_report.dropped_no_counts << "\n"
              << "epochs\t" << args.config.epochs << "\n"
              << "lambda\t" << pv::format_double(args.config.lambda_rank) << "\n"
              << "mode\t" << (args.config.lambda_rank == 0.0 ? "autoencoder-only" : "joint")
              << "\n";
    if (!report.epochs.empty()) {
        const auto& last = report.epochs.back();
        std::cout << "final_rec_loss\t" << pv::format_double(last.mean_rec_loss) << "\n"
                  << "final_rank_loss\t" << pv::format_double(last.mean_rank_loss) << "\n";
    }
    std::cout << "checkpoint\t" << args.out << "\n"
              << "embeddings\t" << args.emb_out << "\n"
              << "log\t" << args.log_out << "\n";
    return 0;
}

// ------------------------------------------------------------------ svd --

struct SvdArgs {
    std::string cooc, vocab, out;
    std::uint32_t dim = 100;
    double exponent = 1.0;
    std::uint64_t seed = 0x5eedULL;
    std::uint32_t oversample = 8;
    std::uint32_t max_iter = 1000;
};

int run_svd(const SvdArgs& args) {
    const pv::Vocabulary vocab = pv::read_vocabulary(args.vocab);
    const pv::CoocMatrix cooc = pv::read_cooc(args.cooc);
    const pv::DesignMatrix design = pv::build_design_matrix(cooc);
    pv::SvdOptions opts;
    opts.seed = args.seed;
    opts.oversample = args.oversample;
    opts.max_iter = args.max_iter;
    const pv::SvdResult svd = pv::truncated_svd(design, args.dim, opts);
    const pv::EmbeddingTable table = pv::table_from_svd(svd, args.exponent, design, vocab);
    pv::write_embeddings(args.out, table);

    auto manifest = make_manifest("svd", args.seed);
    manifest.input_digests[args.cooc] = hex_digest(pv::fnv1a64_file(args.cooc));
    manifest.input_digests[args.vocab] = hex_digest(pv::fnv1a64_file(args.vocab));
    manifest.config = {{"dim", std::to_string(args.dim)},
                       {"exponent", pv::format_double(args.exponent)},
                       {"oversample", std::to_string(args.oversample)},
                       {"out", args.out}};
    pv::write_run_manifest(args.out + ".manifest.json", manifest);

    std::cout << "rows\t" << design.rows() << "\n"
              << "cols\t" << design.cols << "\n"
              << "excluded_rows\t" << (cooc.num_rows - design.rows()) << "\n"
              << "rank\t" << svd.k << "\n"
              << "iterations\t" << svd.iterations << "\n";
    std::cout << "singular_values";
    for (const double s : svd.S) std::cout << '\t' << pv::format_double(s);
    std::cout << "\nout\t" << args.out << "\n";
    return 0;
}

// ------------------------------------------------------------- eval-sim --

int run_eval_sim(const std::string& emb_path, const std::string& dataset,
                 const std::string& manifest_out) {
    const pv::EmbeddingTable table = pv::read_embeddings(emb_path);
    const auto pairs = pv::read_similarity_pairs(dataset);
    const pv::SimilarityResult result = pv::eval_similarity(table, pairs);

    auto manifest = make_manifest("eval-sim", 0);
    manifest.input_digests[emb_path] = hex_digest(pv::fnv1a64_file(emb_path));
    manifest.input_digests[dataset] = hex_digest(pv::fnv1a64_file(dataset));
    pv::write_run_manifest(manifest_out, manifest);

    std::cout << "pairs\t" << result.total << "\n"
              << "covered\t" << result.covered << "\n"
              << "coverage\t"
              << pv::format_double(static_cast<double>(result.covered) /
                                   static_cast<double>(result.total))
              << "\n"
              << "spearman\t" << pv::format_double(result.rho) << "\n";
    return 0;
}

// --------------------------------------------------------- eval-analogy --

int run_eval_analogy(const std::string& emb_path, const std::string& dataset,
                     const std::string& manifest_out) {
    const pv::EmbeddingTable table = pv::read_embeddings(emb_path);
    const auto questions = pv::read_analogy_questions(dataset);
    const pv::AnalogyResult result = pv::eval_analogy(table, questions);

    auto manifest = make_manifest("eval-analogy", 0);
    manifest.input_digests[emb_path] = hex_digest(pv::fnv1a64_file(emb_path));
    manifest.input_digests[dataset] = hex_digest(pv::fnv1a64_file(dataset));
    pv::write_run_manifest(manifest_out, manifest);

    std::cout << "questions\t" << result.total << "\n"
              << "covered\t" << result.covered << "\n"
              << "correct\t" << result.correct << "\n"
              << "accuracy\t" << pv::format_double(result.accuracy()) << "\n";
    // Sections named gram* are the syntactic subset by dataset convention.
    pv::AnalogySectionResult semantic, syntactic;
    for (const auto& [name, sec] : result.sections) {
        auto& bucket = name.rfind("gram", 0) == 0 ? syntactic : semantic;
        bucket.correct += sec.correct;
        bucket.covered += sec.covered;
        bucket.total += sec.total;
        const double acc = sec.covered ? static_cast<double>(sec.correct) / sec.covered : 0.0;
        std::cout << "section\t" << name << '\t' << sec.correct << '\t' << sec.covered << '\t'
                  << pv::format_double(acc) << "\n";
    }
    const auto rollup = [](const char* name, const pv::AnalogySectionResult& sec) {
        const double acc = sec.covered ? static_cast<double>(sec.correct) / sec.covered : 0.0;
        std::cout << name << '\t' << sec.correct << '\t' << sec.covered << '\t'
                  << pv::format_double(acc) << "\n";
    };
    rollup("semantic", semantic);
    rollup("syntactic", syntactic);
    return 0;
}

// ---------------------------------------------------------- eval-phrase --

int run_eval_phrase(const std::string& emb_path, const std::string& phrase_path,
                    const std::vector<std::uint32_t>& k_values, std::uint32_t threads,
                    const std::string& manifest_out) {
    const pv::EmbeddingTable table = pv::read_embeddings(emb_path);
    const auto phrases = pv::read_phrase_lines(phrase_path);
    const pv::PhraseRetrievalResult result =
        pv::eval_phrase_retrieval(table, phrases, k_values, threads);

    auto manifest = make_manifest("eval-phrase", 0);
    manifest.input_digests[emb_path] = hex_digest(pv::fnv1a64_file(emb_path));
    manifest.input_digests[phrase_path] = hex_digest(pv::fnv1a64_file(phrase_path));
    pv::write_run_manifest(manifest_out, manifest);

    std::cout << "phrases\t" << phrases.size() << "\n"
              << "covered\t" << result.covered << "\n"
              << "skipped_oov\t" << result.skipped_oov << "\n";
    for (const auto& [k, recall] : result.recall) {
        std::cout << "recall@" << k << '\t' << pv::format_double(recall) << "\n";
    }
    for (const auto& [len, by_k] : result.recall_by_length) {
        for (const auto& [k, recall] : by_k) {
            std::cout << "length\t" << len << "\tK\t" << k << "\trecall\t"
                      << pv::format_double(recall) << "\tphrases\t"
                      << result.phrases_by_length.at(len) << "\n";
        }
    }
    return 0;
}

// ------------------------------------------------------------------- nn --

struct NnArgs {
    std::string embeddings;
    std::string query;
    std::string phrases;  // collection file; empty = nearest words
    std::string query_mode = "average";
    std::string metric = "cosine";
    std::string model, vocab;
    std::vector<std::string> corpus;
    std::uint32_t window = 10;
    std::size_t k = 10;
    std::string manifest_out;
};

std::vector<double> query_vector_from_words(const pv::EmbeddingTable& table,
                                            const std::vector<std::string>& tokens) {
    std::vector<std::vector<double>> vecs;
    for (const auto& tok : tokens) {
        const auto id = table.find(tok);
        if (!id) throw std::runtime_error("query word '" + tok + "' is not in the embedding table");
        vecs.emplace_back(table.vec(*id).begin(), table.vec(*id).end());
    }
    return pv::compose_phrase(vecs);
}

int run_nn(const NnArgs& args) {
    const pv::EmbeddingTable table = pv::read_embeddings(args.embeddings);
    const auto tokens = pv::tokenize(args.query);
    if (tokens.empty()) throw std::runtime_error("empty query");

    std::vector<double> query;
    if (args.query_mode == "average") {
        query = query_vector_from_words(table, tokens);
    } else if (args.query_mode == "encode") {
        if (args.model.empty() || args.vocab.empty() || args.corpus.empty())
            throw std::runtime_error("--query-mode encode needs --model, --vocab and --corpus");
        const pv::Model model = pv::load_checkpoint(args.model);
        const pv::Vocabulary vocab = pv::read_vocabulary(args.vocab);
        std::vector<std::uint32_t> ids;
        for (const auto& tok : tokens) {
            const auto id = vocab.id_of(tok);
            if (!id) throw std::runtime_error("query word '" + tok + "' is out of vocabulary");
            ids.push_back(*id);
        }
        const auto docs = read_corpus_documents(args.corpus);
        const pv::SparseVector counts =
            pv::collect_phrase_context_counts(docs, vocab, ids, args.window);
        query = pv::infer_from_counts(model, counts);
    } else {
        throw std::runtime_error("unknown query mode '" + args.query_mode + "'");
    }

    auto manifest = make_manifest("nn", 0);
    manifest.input_digests[args.embeddings] = hex_digest(pv::fnv1a64_file(args.embeddings));
    manifest.config = {{"query", args.query},
                       {"query_mode", args.query_mode},
                       {"metric", args.metric},
                       {"k", std::to_string(args.k)}};
    pv::write_run_manifest(args.manifest_out, manifest);

    if (!args.phrases.empty()) {
        const auto collection = pv::read_phrase_lines(args.phrases);
        const auto ranked = pv::nearest_phrases(table, collection, query, args.k);
        std::size_t rank = 1;
        for (const auto& sp : ranked) {
            std::string text;
            for (std::size_t i = 0; i < collection[sp.index].size(); ++i) {
                if (i) text += ' ';
                text += collection[sp.index][i];
            }
            std::cout << rank++ << '\t' << text << '\t' << pv::format_double(sp.score) << "\n";
        }
        return 0;
    }

    const pv::Metric metric = args.metric == "dot" ? pv::Metric::dot : pv::Metric::cosine;
    const auto ranked = pv::nearest_words(table, query, args.k, metric);
    std::size_t rank = 1;
    for (const auto& sw : ranked) {
        std::cout << rank++ << '\t' << table.word(sw.id) << '\t' << pv::format_double(sw.score)
                  << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- infer --

struct InferArgs {
    std::string model, vocab;
    std::string counts;
    std::vector<std::string> corpus;
    std::string phrase;
    std::uint32_t window = 10;
    std::size_t nn = 0;
    std::string embeddings;  // needed for --nn
    std::string out;
    std::string manifest_out;
};

int run_infer(const InferArgs& args) {
    const pv::Model model = pv::load_checkpoint(args.model);
    const pv::Vocabulary vocab = pv::read_vocabulary(args.vocab);

    pv::SparseVector counts;
    counts.dim = vocab.context_size;
    if (!args.counts.empty()) {
        const std::string text = pv::read_file(args.counts);
        std::map<std::uint32_t, double> acc;
        std::size_t skipped = 0;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto fields = pv::split_ws(line);
            if (fields.size() != 2)
                throw std::runtime_error(args.counts + ": expected 'word count' lines");
            const auto id = vocab.id_of(fields[0]);
            if (!id || !vocab.is_context(*id)) {
                ++skipped;
                continue;
            }
            acc[*id] += pv::parse_double(fields[1], args.counts);
        }
        if (skipped)
            std::cerr << "note: skipped " << skipped << " count line(s) outside the context dictionary\n";
        for (const auto& [id, val] : acc) {
            counts.ids.push_back(id);
            counts.vals.push_back(val);
        }
    } else {
        if (args.corpus.empty() || args.phrase.empty())
            throw std::runtime_error("infer needs either --counts or both --corpus and --phrase");
        const auto tokens = pv::tokenize(args.phrase);
        std::vector<std::uint32_t> ids;
        for (const auto& tok : tokens) {
            const auto id = vocab.id_of(tok);
            if (!id) throw std::runtime_error("phrase word '" + tok + "' is out of vocabulary");
            ids.push_back(*id);
        }
        const auto docs = read_corpus_documents(args.corpus);
        counts = pv::collect_phrase_context_counts(docs, vocab, ids, args.window);
    }

    const std::vector<double> vec = pv::infer_from_counts(model, counts);

    auto manifest = make_manifest("infer", 0);
    manifest.input_digests[args.model] = hex_digest(pv::fnv1a64_file(args.model));
    manifest.input_digests[args.vocab] = hex_digest(pv::fnv1a64_file(args.vocab));
    manifest.config = {{"window", std::to_string(args.window)},
                       {"phrase", args.phrase},
                       {"counts", args.counts}};
    pv::write_run_manifest(args.manifest_out, manifest);

    std::cout << "dim\t" << vec.size() << "\n" << "support\t" << counts.nnz() << "\n";
    std::cout << "vector";
    for (const double v : vec) std::cout << '\t' << pv::format_double(v);
    std::cout << "\n";

    if (args.nn > 0) {
        if (args.embeddings.empty())
            throw std::runtime_error("--nn needs --embeddings to rank against");
        const pv::EmbeddingTable table = pv::read_embeddings(args.embeddings);
        const auto ranked = pv::nearest_words(table, vec, args.nn, pv::Metric::cosine);
        std::size_t rank = 1;
        for (const auto& sw : ranked) {
            std::cout << rank++ << '\t' << table.word(sw.id) << '\t'
                      << pv::format_double(sw.score) << "\n";
        }
    }
    if (!args.out.empty()) {
        std::string text = "1 " + std::to_string(vec.size()) + "\n" +
                           (args.phrase.empty() ? std::string("<inferred>")
                                                : "<" + args.phrase + ">");
        for (const double v : vec) {
            text += ' ';
            text += pv::format_double(v);
        }
        text += '\n';
        pv::atomic_write_file(args.out, text);
    }
    return 0;
}

// --------------------------------------------------------------- chunks --

struct ChunksArgs {
    std::vector<std::string> corpus;
    std::string vocab;
    std::size_t max_len = 4;
    std::uint64_t min_count = 1;
    std::string out;
};

int run_chunks(const ChunksArgs& args) {
    const pv::Vocabulary vocab = pv::read_vocabulary(args.vocab);
    const auto docs = read_corpus_documents(args.corpus);
    std::map<std::vector<std::uint32_t>, std::uint64_t> merged;
    for (const auto& doc : docs) {
        for (const auto& chunk : pv::naive_chunks(doc, vocab, args.max_len)) {
            merged[chunk.word_ids] += chunk.count;
        }
    }
    pv::PhraseSet set;
    set.min_phrase_count = args.min_count;
    for (const auto& [ids, count] : merged) {
        if (count >= args.min_count) set.phrases.push_back({ids, count});
    }
    if (set.phrases.empty()) throw std::runtime_error("no chunk candidates survive the threshold");
    pv::write_phrases(args.out, set, vocab);

    auto manifest = make_manifest("chunks", 0);
    add_input_digests(manifest, args.corpus);
    manifest.input_digests[args.vocab] = hex_digest(pv::fnv1a64_file(args.vocab));
    manifest.config = {{"max_len", std::to_string(args.max_len)},
                       {"min_count", std::to_string(args.min_count)},
                       {"out", args.out}};
    pv::write_run_manifest(args.out + ".manifest.json", manifest);

    std::cout << "candidates\t" << set.phrases.size() << "\n" << "out\t" << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phrasevec: joint word and phrase representations from co-occurrence statistics"};
    app.require_subcommand(1);

    VocabArgs vocab_args;
    auto* vocab_cmd = app.add_subcommand("vocab", "build the vocabulary from corpus files");
    vocab_cmd->add_option("--corpus", vocab_args.corpus, "corpus files ('-' = stdin)")->required();
    vocab_cmd->add_option("--min-count", vocab_args.min_count, "minimum word count");
    vocab_cmd->add_option("--context-size", vocab_args.context_size, "context dictionary size");
    vocab_cmd->add_option("--out", vocab_args.out, "output vocabulary file")->required();
    vocab_cmd->add_option("--threads", vocab_args.threads, "counting threads");

    CoocArgs cooc_args;
    auto* cooc_cmd = app.add_subcommand("cooc", "count co-occurrences over the corpus");
    cooc_cmd->add_option("--corpus", cooc_args.corpus, "corpus files (one document each)")->required();
    cooc_cmd->add_option("--vocab", cooc_args.vocab, "vocabulary file")->required();
    cooc_cmd->add_option("--window", cooc_args.window, "symmetric context window");
    cooc_cmd->add_option("--out", cooc_args.out, "output co-occurrence file")->required();
    cooc_cmd->add_option("--threads", cooc_args.threads, "counting threads");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "jointly train the autoencoder and summation");
    train_cmd->add_option("--cooc", train_args.cooc, "co-occurrence file")->required();
    train_cmd->add_option("--vocab", train_args.vocab, "vocabulary file")->required();
    train_cmd->add_option("--phrases", train_args.phrases, "phrase chunk file")->required();
    train_cmd->add_option("--out", train_args.out, "output checkpoint")->required();
    train_cmd->add_option("--emb-out", train_args.emb_out, "output embedding text file");
    train_cmd->add_option("--log-out", train_args.log_out, "training log file");
    train_cmd->add_option("--config", train_args.config_file, "key=value config file");
    auto* dim_opt = train_cmd->add_option("--dim", train_args.config.dim, "embedding dimension");
    auto* lr_opt = train_cmd->add_option("--lr", train_args.config.learning_rate, "SGD learning rate");
    auto* lambda_opt = train_cmd->add_option("--lambda", train_args.config.lambda_rank,
                                             "ranking objective weight");
    auto* neg_opt = train_cmd->add_option("--negatives", train_args.config.negatives,
                                          "negative samples per step");
    auto* epochs_opt = train_cmd->add_option("--epochs", train_args.config.epochs, "phrase epochs");
    auto* seed_opt = train_cmd->add_option("--seed", train_args.config.seed, "rng seed");
    auto* shuffle_opt = train_cmd->add_flag("--no-shuffle", "visit phrases in file order");
    auto* ckpt_opt = train_cmd->add_option("--checkpoint-interval",
                                           train_args.config.checkpoint_interval,
                                           "epochs between intermediate checkpoints");
    auto* pretrain_opt = train_cmd->add_option("--pretrain-epochs", train_args.config.pretrain_epochs,
                                               "reconstruction-only passes over all words");
    auto* weight_opt = train_cmd->add_flag("--weight-by-count", "sample phrases by corpus count");
    auto* threads_opt = train_cmd->add_option("--threads", train_args.config.threads,
                                              "training threads (>1 forfeits determinism)");
    train_cmd->add_option("--min-phrase-count", train_args.min_phrase_count,
                          "minimum phrase occurrence count");
    train_cmd->add_flag("--timing-in-log", train_args.timing_in_log,
                        "write wall seconds into the log file even in deterministic mode");

    SvdArgs svd_args;
    auto* svd_cmd = app.add_subcommand("svd", "truncated SVD baseline embeddings");
    svd_cmd->add_option("--cooc", svd_args.cooc, "co-occurrence file")->required();
    svd_cmd->add_option("--vocab", svd_args.vocab, "vocabulary file")->required();
    svd_cmd->add_option("--dim", svd_args.dim, "rank");
    svd_cmd->add_option("--exponent", svd_args.exponent, "singular value exponent (0, 0.5, 1)");
    svd_cmd->add_option("--seed", svd_args.seed, "rng seed for the start block");
    svd_cmd->add_option("--oversample", svd_args.oversample, "oversampling columns");
    svd_cmd->add_option("--max-iter", svd_args.max_iter, "iteration cap");
    svd_cmd->add_option("--out", svd_args.out, "output embedding text file")->required();

    std::string es_emb, es_data, es_manifest = "phrasevec-eval-sim.manifest.json";
    auto* evalsim_cmd = app.add_subcommand("eval-sim", "word similarity (Spearman)");
    evalsim_cmd->add_option("--embeddings", es_emb, "embedding text file")->required();
    evalsim_cmd->add_option("--dataset", es_data, "word1 word2 score TSV")->required();
    evalsim_cmd->add_option("--manifest", es_manifest, "run manifest path");

    std::string ea_emb, ea_data, ea_manifest = "phrasevec-eval-analogy.manifest.json";
    auto* evalana_cmd = app.add_subcommand("eval-analogy", "word analogy accuracy");
    evalana_cmd->add_option("--embeddings", ea_emb, "embedding text file")->required();
    evalana_cmd->add_option("--dataset", ea_data, "analogy question file")->required();
    evalana_cmd->add_option("--manifest", ea_manifest, "run manifest path");

    std::string ep_emb, ep_phrases, ep_manifest = "phrasevec-eval-phrase.manifest.json";
    std::vector<std::uint32_t> ep_k{1, 5, 10};
    std::uint32_t ep_threads = 1;
    auto* evalphr_cmd = app.add_subcommand("eval-phrase", "phrase word-retrieval recall");
    evalphr_cmd->add_option("--embeddings", ep_emb, "embedding text file")->required();
    evalphr_cmd->add_option("--phrases", ep_phrases, "phrase list file")->required();
    evalphr_cmd->add_option("--k", ep_k, "recall cutoffs");
    evalphr_cmd->add_option("--threads", ep_threads, "evaluation threads");
    evalphr_cmd->add_option("--manifest", ep_manifest, "run manifest path");

    NnArgs nn_args;
    nn_args.manifest_out = "phrasevec-nn.manifest.json";
    auto* nn_cmd = app.add_subcommand("nn", "nearest words or phrases for a query");
    nn_cmd->add_option("--embeddings", nn_args.embeddings, "embedding text file")->required();
    nn_cmd->add_option("--query", nn_args.query, "query word or phrase")->required();
    nn_cmd->add_option("--phrases", nn_args.phrases, "phrase collection to rank instead of words");
    nn_cmd->add_option("--query-mode", nn_args.query_mode, "average | encode");
    nn_cmd->add_option("--metric", nn_args.metric, "dot | cosine (word ranking)");
    nn_cmd->add_option("--model", nn_args.model, "checkpoint (encode mode)");
    nn_cmd->add_option("--vocab", nn_args.vocab, "vocabulary (encode mode)");
    nn_cmd->add_option("--corpus", nn_args.corpus, "corpus files (encode mode)");
    nn_cmd->add_option("--window", nn_args.window, "context window (encode mode)");
    nn_cmd->add_option("--k", nn_args.k, "results to return");
    nn_cmd->add_option("--manifest", nn_args.manifest_out, "run manifest path");

    InferArgs infer_args;
    infer_args.manifest_out = "phrasevec-infer.manifest.json";
    auto* infer_cmd = app.add_subcommand("infer", "infer a representation from context counts");
    infer_cmd->add_option("--model", infer_args.model, "checkpoint")->required();
    infer_cmd->add_option("--vocab", infer_args.vocab, "vocabulary file")->required();
    infer_cmd->add_option("--counts", infer_args.counts, "word count TSV over the context dictionary");
    infer_cmd->add_option("--corpus", infer_args.corpus, "corpus files to count over");
    infer_cmd->add_option("--phrase", infer_args.phrase, "word or phrase to count around");
    infer_cmd->add_option("--window", infer_args.window, "context window");
    infer_cmd->add_option("--nn", infer_args.nn, "also print this many nearest words");
    infer_cmd->add_option("--embeddings", infer_args.embeddings, "embedding table for --nn");
    infer_cmd->add_option("--out", infer_args.out, "write the vector in embedding text format");
    infer_cmd->add_option("--manifest", infer_args.manifest_out, "run manifest path");

    ChunksArgs chunks_args;
    auto* chunks_cmd = app.add_subcommand(
        "chunks", "naive n-gram phrase candidates (test fixture generator, not a chunker)");
    chunks_cmd->add_option("--corpus", chunks_args.corpus, "corpus files")->required();
    chunks_cmd->add_option("--vocab", chunks_args.vocab, "vocabulary file")->required();
    chunks_cmd->add_option("--max-len", chunks_args.max_len, "maximum words per candidate (2..8)");
    chunks_cmd->add_option("--min-count", chunks_args.min_count, "minimum candidate count");
    chunks_cmd->add_option("--out", chunks_args.out, "output phrase file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(vocab_cmd)) return run_vocab(vocab_args);
        if (app.got_subcommand(cooc_cmd)) return run_cooc(cooc_args);
        if (app.got_subcommand(train_cmd)) {
            train_args.config.shuffle = shuffle_opt->count() == 0;
            train_args.given = {{"dim", dim_opt->count() > 0},
                                {"learning_rate", lr_opt->count() > 0},
                                {"lr", lr_opt->count() > 0},
                                {"lambda", lambda_opt->count() > 0},
                                {"lambda_rank", lambda_opt->count() > 0},
                                {"negatives", neg_opt->count() > 0},
                                {"epochs", epochs_opt->count() > 0},
                                {"seed", seed_opt->count() > 0},
                                {"shuffle", shuffle_opt->count() > 0},
                                {"checkpoint_interval", ckpt_opt->count() > 0},
                                {"pretrain_epochs", pretrain_opt->count() > 0},
                                {"weight_by_count", weight_opt->count() > 0},
                                {"threads", threads_opt->count() > 0}};
            if (weight_opt->count() > 0) train_args.config.weight_by_count = true;
            return run_train(train_args);
        }
        if (app.got_subcommand(svd_cmd)) return run_svd(svd_args);
        if (app.got_subcommand(evalsim_cmd)) return run_eval_sim(es_emb, es_data, es_manifest);
        if (app.got_subcommand(evalana_cmd)) return run_eval_analogy(ea_emb, ea_data, ea_manifest);
        if (app.got_subcommand(evalphr_cmd))
            return run_eval_phrase(ep_emb, ep_phrases, ep_k, ep_threads, ep_manifest);
        if (app.got_subcommand(nn_cmd)) return run_nn(nn_args);
        if (app.got_subcommand(infer_cmd)) return run_infer(infer_args);
        if (app.got_subcommand(chunks_cmd)) return run_chunks(chunks_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
