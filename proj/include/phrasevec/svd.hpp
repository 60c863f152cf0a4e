#pragma once

// Truncated SVD of the stacked sqrt-distribution design matrix, the
// standalone low-rank baseline the joint model is compared against.
// The factorization runs block subspace iteration with a seeded random
// start and oversampling; the small projected problem is solved by a
// cyclic Jacobi eigensolver on the Gram matrix.

#include <cstdint>
#include <string>
#include <vector>

#include "phrasevec/cooc.hpp"

namespace phrasevec {

// Rows with no context counts are excluded; word_ids maps kept row -> word.
struct DesignMatrix {
    std::uint32_t cols = 0;
    std::vector<std::uint32_t> word_ids;
    std::vector<std::uint64_t> row_ptr;
    std::vector<std::uint32_t> col_ids;
    std::vector<double> vals;

    std::size_t rows() const { return word_ids.size(); }
};

DesignMatrix build_design_matrix(const CoocMatrix& cooc);

struct SvdOptions {
    std::uint64_t seed = 0x5eedULL;
    std::uint32_t oversample = 8;
    std::uint32_t max_iter = 1000;
    double tol = 1e-12;  // relative change of the kept singular values
};

struct SvdResult {
    std::uint32_t k = 0;          // number of triplets kept
    std::vector<double> U;        // rows x k, row-major
    std::vector<double> S;        // k, descending
    std::vector<double> V;        // cols x k, row-major
    std::uint32_t iterations = 0;
};

// Top-m singular triplets. Sign convention: the largest-magnitude entry of
// each left singular vector is made positive (V flips with U). Throws if m
// exceeds min(rows, cols) or if the iteration fails to converge.
SvdResult truncated_svd(const DesignMatrix& x, std::uint32_t m, const SvdOptions& opts = {});

// Word embeddings U_m * S_m^p, one row per kept design-matrix row.
// p = 1 preserves the geometry of the input rows under projection;
// p = 0 gives bare U. Accepted values: 0, 0.5, 1.
std::vector<double> svd_embeddings(const SvdResult& svd, double sigma_exponent);

}  // namespace phrasevec
