#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "phrasevec/svd.hpp"
#include "support/oracles.hpp"

using namespace phrasevec;
using testsupport::unit_double;

namespace {

DesignMatrix from_dense(const Eigen::MatrixXd& a) {
    DesignMatrix x;
    x.cols = static_cast<std::uint32_t>(a.cols());
    x.row_ptr.push_back(0);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        x.word_ids.push_back(static_cast<std::uint32_t>(r));
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (a(r, c) != 0.0) {
                x.col_ids.push_back(static_cast<std::uint32_t>(c));
                x.vals.push_back(a(r, c));
            }
        }
        x.row_ptr.push_back(x.col_ids.size());
    }
    return x;
}

Eigen::MatrixXd to_dense(const DesignMatrix& x) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.rows()), x.cols);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::uint64_t e = x.row_ptr[r]; e < x.row_ptr[r + 1]; ++e) {
            a(static_cast<Eigen::Index>(r), x.col_ids[e]) = x.vals[e];
        }
    }
    return a;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    Eigen::MatrixXd a(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) a(r, c) = 2.0 * unit_double(rng) - 1.0;
    }
    return a;
}

CoocMatrix toy_cooc() {
    // Two words, a <-> b with window-1 counts from "a b a".
    CoocMatrix m;
    m.num_rows = 2;
    m.num_cols = 2;
    m.window = 1;
    m.row_ptr = {0, 1, 2};
    m.col_ids = {1, 0};
    m.counts = {2, 2};
    m.row_totals = {2, 2};
    return m;
}

}  // namespace

TEST_CASE("design matrix from hand counts has unit rows") {
    const DesignMatrix x = build_design_matrix(toy_cooc());
    REQUIRE(x.rows() == 2);
    CHECK(x.cols == 2);
    const Eigen::MatrixXd dense = to_dense(x);
    CHECK(dense.row(0).norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dense.row(1).norm() == doctest::Approx(1.0).epsilon(1e-9));
    // row 0 is word a: all its mass on context b
    CHECK(dense(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("design matrix excludes empty rows and reports them via word_ids") {
    CoocMatrix m;
    m.num_rows = 3;
    m.num_cols = 2;
    m.window = 1;
    m.row_ptr = {0, 1, 1, 2};  // middle word has no counts
    m.col_ids = {1, 0};
    m.counts = {4, 4};
    m.row_totals = {4, 0, 4};
    const DesignMatrix x = build_design_matrix(m);
    CHECK(x.rows() == 2);
    CHECK(x.word_ids == std::vector<std::uint32_t>{0, 2});
    CHECK(x.rows() + 1 == m.num_rows);  // excluded + kept = |W|

    CoocMatrix empty;
    empty.num_rows = 2;
    empty.num_cols = 2;
    empty.window = 1;
    empty.row_ptr = {0, 0, 0};
    empty.row_totals = {0, 0};
    CHECK_THROWS(build_design_matrix(empty));
}

TEST_CASE("diagonal matrix singular values and embeddings") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a(0, 0) = 3.0;
    a(1, 1) = 2.0;
    a(2, 2) = 1.0;
    const SvdResult svd = truncated_svd(from_dense(a), 2);
    REQUIRE(svd.k == 2);
    CHECK(svd.S[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(svd.S[1] == doctest::Approx(2.0).epsilon(1e-10));
    const auto emb = svd_embeddings(svd, 1.0);
    // Rows are the scaled basis rows, up to the fixed sign convention.
    CHECK(std::abs(emb[0 * 2 + 0]) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(emb[1 * 2 + 1]) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(emb[2 * 2 + 0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rank-1 matrix is recovered exactly at m=1") {
    std::mt19937_64 rng(21);
    Eigen::VectorXd u(6), v(4);
    for (int i = 0; i < 6; ++i) u(i) = 2.0 * unit_double(rng) - 1.0;
    for (int i = 0; i < 4; ++i) v(i) = 2.0 * unit_double(rng) - 1.0;
    const Eigen::MatrixXd a = u * v.transpose();
    const SvdResult svd = truncated_svd(from_dense(a), 1);
    Eigen::MatrixXd rec(6, 4);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 4; ++c) rec(r, c) = svd.U[r] * svd.S[0] * svd.V[c];
    }
    CHECK((a - rec).norm() < 1e-9);
}

TEST_CASE("random 40x25 singular values match the dense oracle") {
    std::mt19937_64 rng(22);
    const Eigen::MatrixXd a = random_matrix(rng, 40, 25);
    const SvdResult svd = truncated_svd(from_dense(a), 10);
    const Eigen::JacobiSVD<Eigen::MatrixXd> oracle(a);
    for (int i = 0; i < 10; ++i) {
        CHECK(testsupport::rel_err(svd.S[i], oracle.singularValues()(i)) < 1e-6);
    }
}

TEST_CASE("eckart-young residual identity") {
    std::mt19937_64 rng(23);
    const Eigen::MatrixXd a = random_matrix(rng, 30, 20);
    const std::uint32_t m = 6;
    const SvdResult svd = truncated_svd(from_dense(a), m);

    Eigen::MatrixXd um(30, m), vm(20, m);
    for (int r = 0; r < 30; ++r) {
        for (std::uint32_t c = 0; c < m; ++c) um(r, c) = svd.U[r * m + c];
    }
    for (int r = 0; r < 20; ++r) {
        for (std::uint32_t c = 0; c < m; ++c) vm(r, c) = svd.V[r * m + c];
    }
    Eigen::VectorXd s(m);
    for (std::uint32_t i = 0; i < m; ++i) s(i) = svd.S[i];
    const double residual = (a - um * s.asDiagonal() * vm.transpose()).squaredNorm();

    const Eigen::JacobiSVD<Eigen::MatrixXd> oracle(a);
    double discarded = 0.0;
    for (int i = m; i < oracle.singularValues().size(); ++i) {
        discarded += oracle.singularValues()(i) * oracle.singularValues()(i);
    }
    CHECK(testsupport::rel_err(residual, discarded) < 1e-6);
}

TEST_CASE("left singular vectors are orthonormal and canonically signed") {
    std::mt19937_64 rng(24);
    const Eigen::MatrixXd a = random_matrix(rng, 18, 12);
    const SvdResult svd = truncated_svd(from_dense(a), 5);
    for (std::uint32_t i = 0; i < 5; ++i) {
        for (std::uint32_t j = 0; j < 5; ++j) {
            double dot = 0.0;
            for (int r = 0; r < 18; ++r) dot += svd.U[r * 5 + i] * svd.U[r * 5 + j];
            CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
        double best = 0.0;
        for (int r = 0; r < 18; ++r) {
            if (std::abs(svd.U[r * 5 + i]) > std::abs(best)) best = svd.U[r * 5 + i];
        }
        CHECK(best > 0.0);
    }
}

TEST_CASE("repeated runs produce identical factors") {
    std::mt19937_64 rng(25);
    const Eigen::MatrixXd a = random_matrix(rng, 15, 10);
    const DesignMatrix x = from_dense(a);
    const SvdResult s1 = truncated_svd(x, 4);
    const SvdResult s2 = truncated_svd(x, 4);
    CHECK(s1.S == s2.S);
    CHECK(s1.U == s2.U);
    CHECK(s1.V == s2.V);
}

TEST_CASE("rank bounds are enforced") {
    std::mt19937_64 rng(26);
    const Eigen::MatrixXd a = random_matrix(rng, 8, 5);
    CHECK_THROWS(truncated_svd(from_dense(a), 6));
    CHECK_THROWS(truncated_svd(from_dense(a), 0));
}

TEST_CASE("svd_embeddings validates the exponent and scales columns") {
    std::mt19937_64 rng(27);
    const Eigen::MatrixXd a = random_matrix(rng, 10, 7);
    const SvdResult svd = truncated_svd(from_dense(a), 3);
    const auto bare = svd_embeddings(svd, 0.0);
    const auto scaled = svd_embeddings(svd, 1.0);
    for (std::size_t r = 0; r < 10; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(scaled[r * 3 + c] == doctest::Approx(bare[r * 3 + c] * svd.S[c]));
        }
    }
    CHECK_THROWS(svd_embeddings(svd, 0.3));
}
