#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "phrasevec/io.hpp"
#include "phrasevec/model.hpp"
#include "phrasevec/trainer.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace phrasevec;
using testsupport::unit_double;

namespace {

Model random_model(std::mt19937_64& rng, std::uint32_t m, std::uint32_t d) {
    Model model(m, d);
    for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) model.enc_at(i, j) = 2.0 * unit_double(rng) - 1.0;
    }
    for (std::uint32_t i = 0; i < d; ++i) {
        for (std::uint32_t j = 0; j < m; ++j) model.dec_at(i, j) = 2.0 * unit_double(rng) - 1.0;
    }
    return model;
}

SqrtDistribution random_sqrt_dist(std::mt19937_64& rng, std::uint32_t dim, std::size_t support) {
    SparseVector p;
    p.dim = dim;
    std::vector<std::uint32_t> ids;
    while (ids.size() < support) {
        const std::uint32_t c = static_cast<std::uint32_t>(rng() % dim);
        bool dup = false;
        for (const auto x : ids) dup |= (x == c);
        if (!dup) ids.push_back(c);
    }
    std::sort(ids.begin(), ids.end());
    const auto dist = testsupport::random_distribution(rng, support);
    p.ids = ids;
    p.vals = dist;
    return sqrt_transform(p);
}

std::vector<double> random_code(std::mt19937_64& rng, std::size_t m) {
    std::vector<double> v(m);
    for (auto& x : v) x = 2.0 * unit_double(rng) - 1.0;
    return v;
}

}  // namespace

TEST_CASE("encode with an identity encoder reproduces the input") {
    Model model(3, 3);
    for (std::uint32_t i = 0; i < 3; ++i) model.enc_at(i, i) = 1.0;
    const std::vector<double> input{0.2, 0.3, 0.4};
    CHECK(encode_dense(model, input) == input);
}

TEST_CASE("encode of the zero vector is zero") {
    std::mt19937_64 rng(1);
    const Model model = random_model(rng, 3, 5);
    const std::vector<double> zero(5, 0.0);
    for (const double v : encode_dense(model, zero)) CHECK(v == 0.0);
}

TEST_CASE("encode matches a hand multiply on a 3x4 encoder") {
    Model model(3, 4);
    const double e[3][4] = {{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}};
    for (std::uint32_t i = 0; i < 3; ++i) {
        for (std::uint32_t j = 0; j < 4; ++j) model.enc_at(i, j) = e[i][j];
    }
    const std::vector<double> input{0.5, 0.5, 0.5, 0.5};
    const auto code = encode_dense(model, input);
    for (std::uint32_t i = 0; i < 3; ++i) {
        double want = 0.0;
        for (std::uint32_t j = 0; j < 4; ++j) want += e[i][j] * input[j];
        CHECK(code[i] == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK_THROWS(encode_dense(model, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("sparse and dense encode agree") {
    std::mt19937_64 rng(2);
    const Model model = random_model(rng, 4, 9);
    const SqrtDistribution s = random_sqrt_dist(rng, 9, 4);
    std::vector<double> dense(9, 0.0);
    for (std::size_t k = 0; k < s.ids.size(); ++k) dense[s.ids[k]] = s.vals[k];
    const auto a = encode(model, s);
    const auto b = encode_dense(model, dense);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("decode basics") {
    std::mt19937_64 rng(3);
    const Model model = random_model(rng, 3, 4);
    const std::vector<double> zero(3, 0.0);
    for (const double v : decode(model, zero)) CHECK(v == 0.0);

    // Basis code picks out a decoder column.
    const std::vector<double> e0{1.0, 0.0, 0.0};
    const auto out = decode(model, e0);
    for (std::uint32_t i = 0; i < 4; ++i) CHECK(out[i] == model.dec_at(i, 0));

    CHECK_THROWS(decode(model, std::vector<double>{1.0}));
}

TEST_CASE("orthonormal encoder with transposed decoder projects") {
    // Encoder rows span the first two coordinates.
    Model model(2, 3);
    model.enc_at(0, 0) = 1.0;
    model.enc_at(1, 1) = 1.0;
    for (std::uint32_t i = 0; i < 3; ++i) {
        for (std::uint32_t j = 0; j < 2; ++j) model.dec_at(i, j) = model.enc_at(j, i);
    }
    const std::vector<double> v{0.3, -0.7, 0.9};
    const auto back = decode(model, encode_dense(model, v));
    CHECK(back[0] == doctest::Approx(0.3));
    CHECK(back[1] == doctest::Approx(-0.7));
    CHECK(back[2] == doctest::Approx(0.0));
}

TEST_CASE("encode and decode are linear maps") {
    std::mt19937_64 rng(4);
    const Model model = random_model(rng, 5, 11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(11), v(11);
        for (auto& x : u) x = 2.0 * unit_double(rng) - 1.0;
        for (auto& x : v) x = 2.0 * unit_double(rng) - 1.0;
        const double a = 2.0 * unit_double(rng) - 1.0;
        const double b = 2.0 * unit_double(rng) - 1.0;
        std::vector<double> mix(11);
        for (std::size_t i = 0; i < 11; ++i) mix[i] = a * u[i] + b * v[i];
        const auto lhs = encode_dense(model, mix);
        const auto eu = encode_dense(model, u);
        const auto ev = encode_dense(model, v);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(std::abs(lhs[i] - (a * eu[i] + b * ev[i])) < 1e-9);
        }
    }
}

TEST_CASE("reconstruction loss is zero at a perfect autoencoder") {
    Model model(2, 2);
    model.enc_at(0, 0) = model.enc_at(1, 1) = 1.0;
    model.dec_at(0, 0) = model.dec_at(1, 1) = 1.0;
    SqrtDistribution s;
    s.dim = 2;
    s.ids = {0, 1};
    s.vals = {std::sqrt(0.5), std::sqrt(0.5)};
    const ReconGrads g = reconstruction_loss_and_grads(model, s);
    CHECK(g.loss == doctest::Approx(0.0).epsilon(1e-15));
    for (const double v : g.code_grad) CHECK(std::abs(v) < 1e-12);
    for (const double v : g.residual) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("zero model reconstruction loss equals the unit input norm") {
    Model model(2, 4);
    SqrtDistribution s;
    s.dim = 4;
    s.ids = {1, 3};
    s.vals = {std::sqrt(0.25), std::sqrt(0.75)};
    const ReconGrads g = reconstruction_loss_and_grads(model, s);
    CHECK(g.loss == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reconstruction gradients match central finite differences") {
    std::mt19937_64 rng(5);
    const double h = 1e-5;
    for (int trial = 0; trial < 25; ++trial) {
        Model model = random_model(rng, 3, 6);
        const SqrtDistribution s = random_sqrt_dist(rng, 6, 3);
        const ReconGrads g = reconstruction_loss_and_grads(model, s);

        std::vector<double> dense(6, 0.0);
        for (std::size_t k = 0; k < s.ids.size(); ++k) dense[s.ids[k]] = s.vals[k];

        for (std::uint32_t i = 0; i < 3; ++i) {
            for (std::uint32_t j = 0; j < 6; ++j) {
                const double analytic = g.code_grad[i] * dense[j];
                const double saved = model.enc_at(i, j);
                model.enc_at(i, j) = saved + h;
                const double lp = reconstruction_loss_and_grads(model, s).loss;
                model.enc_at(i, j) = saved - h;
                const double lm = reconstruction_loss_and_grads(model, s).loss;
                model.enc_at(i, j) = saved;
                const double fd = (lp - lm) / (2.0 * h);
                CHECK(testsupport::rel_err(analytic, fd) < 1e-5);
            }
        }
        for (std::uint32_t i = 0; i < 6; ++i) {
            for (std::uint32_t j = 0; j < 3; ++j) {
                const double analytic = 2.0 * g.residual[i] * g.code[j];
                const double saved = model.dec_at(i, j);
                model.dec_at(i, j) = saved + h;
                const double lp = reconstruction_loss_and_grads(model, s).loss;
                model.dec_at(i, j) = saved - h;
                const double lm = reconstruction_loss_and_grads(model, s).loss;
                model.dec_at(i, j) = saved;
                const double fd = (lp - lm) / (2.0 * h);
                CHECK(testsupport::rel_err(analytic, fd) < 1e-5);
            }
        }
    }
}

TEST_CASE("compose_phrase basics") {
    const std::vector<std::vector<double>> one{{1.0, -2.0}};
    CHECK(compose_phrase(one) == one[0]);

    const std::vector<std::vector<double>> pm{{3.0, 4.0}, {-3.0, -4.0}};
    for (const double v : compose_phrase(pm)) CHECK(v == 0.0);

    const std::vector<std::vector<double>> three{{1.0, 2.0}, {3.0, 5.0}, {5.0, 11.0}};
    const auto mean = compose_phrase(three);
    CHECK(mean[0] == doctest::Approx(3.0));
    CHECK(mean[1] == doctest::Approx(6.0));

    CHECK_THROWS(compose_phrase(std::vector<std::vector<double>>{}));
}

TEST_CASE("compose_phrase norm never exceeds the largest input norm") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> vecs(1 + rng() % 5);
        double max_norm = 0.0;
        for (auto& v : vecs) {
            v = random_code(rng, 4);
            double n2 = 0;
            for (const double x : v) n2 += x * x;
            max_norm = std::max(max_norm, std::sqrt(n2));
        }
        const auto mean = compose_phrase(vecs);
        double n2 = 0;
        for (const double x : mean) n2 += x * x;
        CHECK(std::sqrt(n2) <= max_norm + 1e-12);
    }
}

TEST_CASE("ranking loss is zero when every margin is satisfied") {
    const std::vector<std::vector<double>> phrase{{10.0, 0.0}, {10.0, 0.0}};
    const std::vector<std::vector<double>> negatives{{-10.0, 0.0}};
    const RankingGrads g = ranking_loss_and_grads(phrase, negatives);
    CHECK(g.loss == 0.0);
    for (const auto& grad : g.phrase_grads) {
        for (const double v : grad) CHECK(v == 0.0);
    }
    for (const auto& grad : g.negative_grads) {
        for (const double v : grad) CHECK(v == 0.0);
    }
}

TEST_CASE("a margin of exactly zero is inactive") {
    // x_s = (1,0); positive score 1, negative score 0: max(0, 1 - 1 + 0) = 0.
    const std::vector<std::vector<double>> phrase{{1.0, 0.0}};
    const std::vector<std::vector<double>> negatives{{0.0, 5.0}};
    const RankingGrads g = ranking_loss_and_grads(phrase, negatives);
    CHECK(g.loss == 0.0);
    for (const double v : g.phrase_grads[0]) CHECK(v == 0.0);
    for (const double v : g.negative_grads[0]) CHECK(v == 0.0);
}

TEST_CASE("all-zero vectors give loss T*N") {
    const std::vector<std::vector<double>> phrase(3, std::vector<double>(4, 0.0));
    const std::vector<std::vector<double>> negatives(5, std::vector<double>(4, 0.0));
    const RankingGrads g = ranking_loss_and_grads(phrase, negatives);
    CHECK(g.loss == doctest::Approx(15.0));
    CHECK_THROWS(ranking_loss_and_grads(phrase, std::vector<std::vector<double>>{}));
}

TEST_CASE("ranking subgradients match finite differences away from kinks") {
    std::mt19937_64 rng(7);
    const double h = 1e-5;
    int done = 0;
    while (done < 25) {
        const std::size_t T = 1 + rng() % 3;
        const std::size_t N = 1 + rng() % 4;
        const std::size_t m = 3;
        std::vector<std::vector<double>> phrase(T), negatives(N);
        for (auto& v : phrase) v = random_code(rng, m);
        for (auto& v : negatives) v = random_code(rng, m);

        // Keep every pair's margin clear of the hinge.
        const auto margins_safe = [&]() {
            const auto xs = compose_phrase(phrase);
            for (const auto& p : phrase) {
                double sp = 0;
                for (std::size_t i = 0; i < m; ++i) sp += xs[i] * p[i];
                for (const auto& n : negatives) {
                    double sn = 0;
                    for (std::size_t i = 0; i < m; ++i) sn += xs[i] * n[i];
                    if (std::abs(1.0 - sp + sn) < 1e-3) return false;
                }
            }
            return true;
        };
        if (!margins_safe()) continue;
        ++done;

        const RankingGrads g = ranking_loss_and_grads(phrase, negatives);
        const auto loss_at = [&]() { return ranking_loss_and_grads(phrase, negatives).loss; };

        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < m; ++i) {
                const double saved = phrase[t][i];
                phrase[t][i] = saved + h;
                const double lp = loss_at();
                phrase[t][i] = saved - h;
                const double lm = loss_at();
                phrase[t][i] = saved;
                const double fd = (lp - lm) / (2.0 * h);
                if (std::abs(fd) > 1e-8 || std::abs(g.phrase_grads[t][i]) > 1e-8) {
                    CHECK(testsupport::rel_err(g.phrase_grads[t][i], fd) < 1e-5);
                }
            }
        }
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t i = 0; i < m; ++i) {
                const double saved = negatives[n][i];
                negatives[n][i] = saved + h;
                const double lp = loss_at();
                negatives[n][i] = saved - h;
                const double lm = loss_at();
                negatives[n][i] = saved;
                const double fd = (lp - lm) / (2.0 * h);
                if (std::abs(fd) > 1e-8 || std::abs(g.negative_grads[n][i]) > 1e-8) {
                    CHECK(testsupport::rel_err(g.negative_grads[n][i], fd) < 1e-5);
                }
            }
        }
    }
}

TEST_CASE("sample_negatives forced and deterministic") {
    std::mt19937_64 rng(8);
    const std::vector<std::uint32_t> phrase{0};
    const auto forced = sample_negatives(rng, 3, phrase, 2);
    std::vector<std::uint32_t> sorted = forced;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::uint32_t>{1, 2});

    std::mt19937_64 r1(99), r2(99);
    CHECK(sample_negatives(r1, 1000, phrase, 10) == sample_negatives(r2, 1000, phrase, 10));

    CHECK_THROWS(sample_negatives(rng, 3, phrase, 3));
}

TEST_CASE("sample_negatives draws uniformly") {
    std::mt19937_64 rng(12345);
    const std::vector<std::uint32_t> phrase{0};
    std::vector<std::size_t> freq(100, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        ++freq[sample_negatives(rng, 100, phrase, 1)[0]];
    }
    CHECK(freq[0] == 0);
    const double p = 1.0 / 99.0;
    const double mean = draws * p;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    for (std::size_t w = 1; w < 100; ++w) {
        CHECK(std::abs(static_cast<double>(freq[w]) - mean) <= 4.0 * sigma);
    }
    // Chi-square over the eligible words: df = 98, far tail at ~148.
    double chi2 = 0.0;
    for (std::size_t w = 1; w < 100; ++w) {
        const double d = static_cast<double>(freq[w]) - mean;
        chi2 += d * d / mean;
    }
    CHECK(chi2 < 148.0);
}

TEST_CASE("infer_from_counts matches a hand multiply on a 2x2 encoder") {
    Model model(2, 2);
    model.enc_at(0, 0) = 1.0;
    model.enc_at(0, 1) = 2.0;
    model.enc_at(1, 0) = 3.0;
    model.enc_at(1, 1) = 4.0;
    SparseVector counts;
    counts.dim = 2;
    counts.ids = {0, 1};
    counts.vals = {1.0, 3.0};
    const auto vec = infer_from_counts(model, counts);
    const double s0 = std::sqrt(0.25), s1 = std::sqrt(0.75);
    CHECK(vec[0] == doctest::Approx(1.0 * s0 + 2.0 * s1).epsilon(1e-14));
    CHECK(vec[1] == doctest::Approx(3.0 * s0 + 4.0 * s1).epsilon(1e-14));
}

TEST_CASE("infer_from_counts is invariant under count scaling") {
    std::mt19937_64 rng(9);
    const Model model = random_model(rng, 3, 7);
    SparseVector counts;
    counts.dim = 7;
    counts.ids = {1, 2, 5};
    counts.vals = {2.0, 5.0, 1.0};
    const auto base = infer_from_counts(model, counts);
    for (const double scale : {7.0, 0.5, 1234.0}) {
        SparseVector scaled = counts;
        for (auto& v : scaled.vals) v *= scale;
        const auto vec = infer_from_counts(model, scaled);
        for (std::size_t i = 0; i < vec.size(); ++i) {
            CHECK(vec[i] == doctest::Approx(base[i]).epsilon(1e-12));
        }
    }
    CHECK_THROWS(infer_from_counts(model, SparseVector{}));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    testsupport::TempDir tmp("ckpt");
    std::mt19937_64 rng(10);
    const Model model = random_model(rng, 4, 6);
    const std::string path = tmp.file("model.pvec");
    save_checkpoint(path, model, "vocab.tsv");
    const Model back = load_checkpoint(path);
    CHECK(back.dim() == model.dim());
    CHECK(back.input_dim() == model.input_dim());
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (std::uint32_t j = 0; j < 6; ++j) CHECK(back.enc_at(i, j) == model.enc_at(i, j));
    }
    for (std::uint32_t i = 0; i < 6; ++i) {
        for (std::uint32_t j = 0; j < 4; ++j) CHECK(back.dec_at(i, j) == model.dec_at(i, j));
    }
    CHECK(read_file(path + ".meta").find("vocab.tsv") != std::string::npos);
    CHECK_THROWS(load_checkpoint(tmp.write("junk.pvec", "not a checkpoint")));
}
