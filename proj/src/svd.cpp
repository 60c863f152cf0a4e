#include "phrasevec/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "phrasevec/simd.hpp"

namespace phrasevec {

namespace {

double gaussian(std::mt19937_64& rng) {
    // Box-Muller on engine-native uniforms, for cross-platform determinism.
    double u1;
    do {
        u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// In-place modified Gram-Schmidt on the k columns of a (n x k, row-major)
// block; two passes for stability. Degenerate columns are replaced by zero
// (they drop out of the Gram spectrum).
void orthonormalize_columns(std::vector<double>& a, std::size_t n, std::size_t k) {
    for (std::size_t pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                double dot = 0.0;
                for (std::size_t r = 0; r < n; ++r) dot += a[r * k + i] * a[r * k + j];
                for (std::size_t r = 0; r < n; ++r) a[r * k + j] -= dot * a[r * k + i];
            }
            double norm2 = 0.0;
            for (std::size_t r = 0; r < n; ++r) norm2 += a[r * k + j] * a[r * k + j];
            const double norm = std::sqrt(norm2);
            if (norm > 1e-300) {
                const double inv = 1.0 / norm;
                for (std::size_t r = 0; r < n; ++r) a[r * k + j] *= inv;
            } else {
                for (std::size_t r = 0; r < n; ++r) a[r * k + j] = 0.0;
            }
        }
    }
}

// Cyclic Jacobi eigendecomposition of a symmetric k x k matrix. Returns
// eigenvalues (descending) and the rotation matrix with eigenvectors in
// columns.
void jacobi_eigen(std::vector<double> a, std::size_t k, std::vector<double>& eigvals,
                  std::vector<double>& eigvecs) {
    eigvecs.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) eigvecs[i * k + i] = 1.0;
    for (std::size_t sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) off += a[p * k + q] * a[p * k + q];
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = a[p * k + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * k + p];
                const double aqq = a[q * k + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < k; ++r) {
                    const double arp = a[r * k + p];
                    const double arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double apr = a[p * k + r];
                    const double aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double vrp = eigvecs[r * k + p];
                    const double vrq = eigvecs[r * k + q];
                    eigvecs[r * k + p] = c * vrp - s * vrq;
                    eigvecs[r * k + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    eigvals.resize(k);
    for (std::size_t i = 0; i < k; ++i) eigvals[i] = a[i * k + i];
    // Sort descending, permuting eigenvector columns along.
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return eigvals[i] > eigvals[j]; });
    std::vector<double> sorted_vals(k);
    std::vector<double> sorted_vecs(k * k);
    for (std::size_t j = 0; j < k; ++j) {
        sorted_vals[j] = eigvals[order[j]];
        for (std::size_t r = 0; r < k; ++r) sorted_vecs[r * k + j] = eigvecs[r * k + order[j]];
    }
    eigvals = std::move(sorted_vals);
    eigvecs = std::move(sorted_vecs);
}

// B = X * Q, where Q is cols x k and B is rows x k (both row-major).
void sparse_times_dense(const DesignMatrix& x, const std::vector<double>& q, std::size_t k,
                        std::vector<double>& b) {
    b.assign(x.rows() * k, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double* out = b.data() + r * k;
        for (std::uint64_t e = x.row_ptr[r]; e < x.row_ptr[r + 1]; ++e) {
            simd::axpy(x.vals[e], q.data() + std::size_t(x.col_ids[e]) * k, out, k);
        }
    }
}

// W = X^T * B, cols x k.
void sparse_transpose_times_dense(const DesignMatrix& x, const std::vector<double>& b,
                                  std::size_t k, std::vector<double>& w) {
    w.assign(std::size_t(x.cols) * k, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* in = b.data() + r * k;
        for (std::uint64_t e = x.row_ptr[r]; e < x.row_ptr[r + 1]; ++e) {
            simd::axpy(x.vals[e], in, w.data() + std::size_t(x.col_ids[e]) * k, k);
        }
    }
}

}  // namespace

DesignMatrix build_design_matrix(const CoocMatrix& cooc) {
    DesignMatrix x;
    x.cols = cooc.num_cols;
    x.row_ptr.push_back(0);
    for (std::uint32_t w = 0; w < cooc.num_rows; ++w) {
        if (cooc.row_empty(w)) continue;
        const SqrtDistribution row = sqrt_row(cooc, w);
        x.word_ids.push_back(w);
        x.col_ids.insert(x.col_ids.end(), row.ids.begin(), row.ids.end());
        x.vals.insert(x.vals.end(), row.vals.begin(), row.vals.end());
        x.row_ptr.push_back(x.col_ids.size());
    }
    if (x.word_ids.empty())
        throw std::runtime_error("design matrix is empty: no word has context counts");
    return x;
}

SvdResult truncated_svd(const DesignMatrix& x, std::uint32_t m, const SvdOptions& opts) {
    const std::size_t rows = x.rows();
    const std::size_t cols = x.cols;
    const std::size_t min_dim = std::min(rows, cols);
    if (m < 1 || m > min_dim)
        throw std::invalid_argument("rank " + std::to_string(m) +
                                    " out of range for a " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + " matrix");
    const std::size_t k = std::min<std::size_t>(m + opts.oversample, min_dim);

    // Seeded random start in the column space.
    std::mt19937_64 rng(opts.seed);
    std::vector<double> q(cols * k);
    for (auto& v : q) v = gaussian(rng);
    orthonormalize_columns(q, cols, k);

    std::vector<double> b;        // X Q, rows x k
    std::vector<double> gram(k * k);
    std::vector<double> eigvals, eigvecs;
    std::vector<double> sigma_prev(m, 0.0);
    std::vector<double> sigma(m, 0.0);

    std::uint32_t iter = 0;
    double max_rel_change = std::numeric_limits<double>::infinity();
    for (iter = 1; iter <= opts.max_iter; ++iter) {
        sparse_times_dense(x, q, k, b);
        // Gram = (XQ)^T (XQ); its eigenpairs give the projected SVD.
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i; j < k; ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < rows; ++r) acc += b[r * k + i] * b[r * k + j];
                gram[i * k + j] = acc;
                gram[j * k + i] = acc;
            }
        }
        jacobi_eigen(gram, k, eigvals, eigvecs);
        for (std::size_t i = 0; i < m; ++i) {
            sigma[i] = eigvals[i] > 0.0 ? std::sqrt(eigvals[i]) : 0.0;
        }
        max_rel_change = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double denom = std::max(sigma[i], 1e-300);
            max_rel_change = std::max(max_rel_change,
                                      std::abs(sigma[i] - sigma_prev[i]) / denom);
        }
        sigma_prev = sigma;
        if (iter > 1 && max_rel_change < opts.tol) break;
        if (iter == opts.max_iter) break;
        // Subspace step: Q <- orth(X^T X Q).
        sparse_transpose_times_dense(x, b, k, q);
        orthonormalize_columns(q, cols, k);
    }
    if (max_rel_change >= std::max(opts.tol, 1e-9) && iter >= opts.max_iter) {
        throw std::runtime_error(
            "truncated SVD did not converge after " + std::to_string(opts.max_iter) +
            " iterations (last relative change " + std::to_string(max_rel_change) + ")");
    }

    // Rotate the subspace onto the eigenbasis: V = Q * E, U = B * E / sigma.
    SvdResult result;
    result.k = m;
    result.iterations = iter;
    result.S.assign(sigma.begin(), sigma.begin() + m);
    result.V.assign(cols * m, 0.0);
    for (std::size_t r = 0; r < cols; ++r) {
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += q[r * k + i] * eigvecs[i * k + j];
            result.V[r * m + j] = acc;
        }
    }
    result.U.assign(rows * m, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += b[r * k + i] * eigvecs[i * k + j];
            result.U[r * m + j] = result.S[j] > 0.0 ? acc / result.S[j] : 0.0;
        }
    }

    // Canonical signs: largest-magnitude entry of each u_j positive, first
    // index winning ties; v_j flips together with u_j.
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < rows; ++r) {
            const double mag = std::abs(result.U[r * m + j]);
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        if (result.U[arg * m + j] < 0.0) {
            for (std::size_t r = 0; r < rows; ++r) result.U[r * m + j] = -result.U[r * m + j];
            for (std::size_t r = 0; r < cols; ++r) result.V[r * m + j] = -result.V[r * m + j];
        }
    }
    return result;
}

std::vector<double> svd_embeddings(const SvdResult& svd, double sigma_exponent) {
    if (sigma_exponent != 0.0 && sigma_exponent != 0.5 && sigma_exponent != 1.0)
        throw std::invalid_argument("sigma exponent must be 0, 0.5 or 1");
    const std::size_t rows = svd.U.size() / svd.k;
    std::vector<double> emb(svd.U.size());
    for (std::size_t j = 0; j < svd.k; ++j) {
        const double w = std::pow(svd.S[j], sigma_exponent);
        for (std::size_t r = 0; r < rows; ++r) emb[r * svd.k + j] = svd.U[r * svd.k + j] * w;
    }
    return emb;
}

}  // namespace phrasevec
