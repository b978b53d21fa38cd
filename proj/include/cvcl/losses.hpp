#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cvcl/matrix.hpp"

namespace cvcl {

struct LossWeights {
    double alpha = 0.01;  // weight of the cross-view contrastive term
    double beta = 0.01;   // weight of the consistency regularizer
    double tau = 0.5;     // temperature inside the contrastive exponentials
};

inline constexpr double kLossEps = 1e-12;

// Sharpened target distribution: p_ij = (h_ij^2 / colsum_j) normalized per row.
// Column sums run over the rows actually present (the current batch).
template <typename T>
Matrix<T> target_distribution(const Matrix<T>& h) {
    const std::size_t m = h.rows(), k = h.cols();
    std::vector<T> colsum(k, T{0});
    for (std::size_t i = 0; i < m; ++i) {
        auto r = h.row(i);
        for (std::size_t j = 0; j < k; ++j) colsum[j] += r[j];
    }
    // Guarded divisors keep degenerate batches (a cluster with no mass) finite
    // without perturbing the ordinary case.
    for (auto& c : colsum) c = std::max(c, static_cast<T>(kLossEps));
    Matrix<T> p(m, k);
    for (std::size_t i = 0; i < m; ++i) {
        auto r = h.row(i);
        auto q = p.row(i);
        T rowsum{0};
        for (std::size_t j = 0; j < k; ++j) {
            q[j] = r[j] * r[j] / colsum[j];
            rowsum += q[j];
        }
        rowsum = std::max(rowsum, static_cast<T>(kLossEps));
        for (std::size_t j = 0; j < k; ++j) q[j] /= rowsum;
    }
    return p;
}

// Gradient of a scalar loss through target_distribution: given dL/dP, returns
// dL/dH. Sharpening is differentiated exactly, including the column sums.
template <typename T>
Matrix<T> target_distribution_backward(const Matrix<T>& h, const Matrix<T>& grad_p) {
    const std::size_t m = h.rows(), k = h.cols();
    std::vector<T> colsum(k, T{0});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) colsum[j] += h(i, j);
    for (auto& c : colsum) c = std::max(c, static_cast<T>(kLossEps));

    // Recompute u and p, then dL/du per entry.
    Matrix<T> u(m, k);
    Matrix<T> du(m, k);
    std::vector<T> rowsum(m);
    for (std::size_t i = 0; i < m; ++i) {
        T rs{0};
        for (std::size_t j = 0; j < k; ++j) {
            u(i, j) = h(i, j) * h(i, j) / colsum[j];
            rs += u(i, j);
        }
        rowsum[i] = std::max(rs, static_cast<T>(kLossEps));
        T gp_dot_p{0};
        for (std::size_t j = 0; j < k; ++j) gp_dot_p += grad_p(i, j) * u(i, j) / rowsum[i];
        for (std::size_t j = 0; j < k; ++j)
            du(i, j) = (grad_p(i, j) - gp_dot_p) / rowsum[i];
    }
    // dL/dh_lj = (2 h_lj du_lj - S_j / colsum_j) / colsum_j, S_j = sum_i du_ij h_ij^2.
    std::vector<T> s(k, T{0});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) s[j] += du(i, j) * h(i, j) * h(i, j);
    Matrix<T> dh(m, k);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j)
            dh(i, j) = (T{2} * h(i, j) * du(i, j) - s[j] / colsum[j]) / colsum[j];
    return dh;
}

// Dot-product similarity between two cluster-assignment columns.
template <typename T>
T column_similarity(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) throw UsageError("column_similarity: length mismatch");
    T s{0};
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

namespace detail {

// Shared forward machinery for the pairwise contrastive loss. With
// A = Pa^T Pa and B = Pa^T Pb (K x K column Grams), per anchor cluster c:
//   positive exponent  B[c,c]/tau
//   denominator terms  A[j,c]/tau (j != c)  and  B[j,c]/tau (all j),
// reduced in log-sum-exp form.
template <typename T>
struct PairwiseTerms {
    Matrix<T> gram_aa;   // K x K
    Matrix<T> gram_ab;   // K x K
    std::vector<T> log_denom;
    T loss;
};

template <typename T>
PairwiseTerms<T> pairwise_terms(const Matrix<T>& pa, const Matrix<T>& pb, T tau) {
    if (pa.rows() != pb.rows() || pa.cols() != pb.cols())
        throw UsageError("pairwise_contrastive_loss: shape mismatch");
    if (pa.cols() == 0) throw UsageError("pairwise_contrastive_loss: K must be >= 1");
    if (!(tau > T{0})) throw ConfigError("temperature tau must be > 0");
    const std::size_t k = pa.cols();
    PairwiseTerms<T> t;
    t.gram_aa = multiply_at_b(pa, pa);
    t.gram_ab = multiply_at_b(pa, pb);
    t.log_denom.resize(k);
    T loss{0};
    for (std::size_t c = 0; c < k; ++c) {
        T mx = t.gram_ab(c, c) / tau;
        for (std::size_t j = 0; j < k; ++j) {
            if (j != c) mx = std::max(mx, t.gram_aa(j, c) / tau);
            mx = std::max(mx, t.gram_ab(j, c) / tau);
        }
        T sum{0};
        for (std::size_t j = 0; j < k; ++j) {
            if (j != c) sum += std::exp(t.gram_aa(j, c) / tau - mx);
            sum += std::exp(t.gram_ab(j, c) / tau - mx);
        }
        t.log_denom[c] = mx + std::log(sum);
        loss += -(t.gram_ab(c, c) / tau - t.log_denom[c]);
    }
    t.loss = loss / static_cast<T>(k);
    return t;
}

}  // namespace detail

// Contrastive loss between two views' assignment matrices (asymmetric in its
// arguments: negatives are drawn from the first view against both views).
template <typename T>
T pairwise_contrastive_loss(const Matrix<T>& pa, const Matrix<T>& pb, T tau) {
    return detail::pairwise_terms(pa, pb, tau).loss;
}

// Accumulates scale * d(pairwise loss)/dPa and /dPb into the given buffers.
template <typename T>
void pairwise_contrastive_backward(const Matrix<T>& pa, const Matrix<T>& pb, T tau, T scale,
                                   Matrix<T>& grad_pa, Matrix<T>& grad_pb) {
    const auto t = detail::pairwise_terms(pa, pb, tau);
    const std::size_t k = pa.cols();
    const T inv_ktau = scale / (static_cast<T>(k) * tau);
    // Gradients w.r.t. the two Gram matrices.
    Matrix<T> ga(k, k);  // d/d gram_aa
    Matrix<T> gb(k, k);  // d/d gram_ab
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < k; ++j) {
            const T soft_ab = std::exp(t.gram_ab(j, c) / tau - t.log_denom[c]);
            gb(j, c) = inv_ktau * soft_ab;
            if (j != c) {
                const T soft_aa = std::exp(t.gram_aa(j, c) / tau - t.log_denom[c]);
                ga(j, c) = inv_ktau * soft_aa;
            }
        }
        gb(c, c) -= inv_ktau;  // positive-pair term
    }
    // gram_aa = Pa^T Pa  ->  dPa += Pa (Ga + Ga^T)
    // gram_ab = Pa^T Pb  ->  dPa += Pb Gb^T, dPb += Pa Gb
    Matrix<T> ga_sym = ga + transpose(ga);
    grad_pa += multiply(pa, ga_sym);
    grad_pa += multiply_a_bt(pb, gb);
    grad_pb += multiply(pa, gb);
}

// Half-sum of the pairwise loss over ordered view pairs.
template <typename T>
T cross_view_contrastive_loss(const std::vector<Matrix<T>>& ps, T tau) {
    if (ps.size() < 2) throw UsageError("cross_view_contrastive_loss needs >= 2 views");
    T total{0};
    for (std::size_t a = 0; a < ps.size(); ++a)
        for (std::size_t b = 0; b < ps.size(); ++b)
            if (a != b) total += pairwise_contrastive_loss(ps[a], ps[b], tau);
    return total / T{2};
}

template <typename T>
void cross_view_contrastive_backward(const std::vector<Matrix<T>>& ps, T tau, T scale,
                                     std::vector<Matrix<T>>& grad_ps) {
    if (ps.size() < 2) throw UsageError("cross_view_contrastive_loss needs >= 2 views");
    for (std::size_t a = 0; a < ps.size(); ++a)
        for (std::size_t b = 0; b < ps.size(); ++b)
            if (a != b)
                pairwise_contrastive_backward(ps[a], ps[b], tau, scale / T{2}, grad_ps[a],
                                              grad_ps[b]);
}

// Entropy-style regularizer on per-view cluster mass: sum_v sum_j q_j log q_j
// with q_j the column mean of P^(v). Zero iff each view puts all mass in one
// cluster; most negative at uniform mass.
template <typename T>
T consistency_regularizer(const std::vector<Matrix<T>>& ps) {
    T total{0};
    for (const auto& p : ps) {
        const T inv_m = T{1} / static_cast<T>(p.rows());
        for (std::size_t j = 0; j < p.cols(); ++j) {
            T q{0};
            for (std::size_t i = 0; i < p.rows(); ++i) q += p(i, j);
            q *= inv_m;
            if (q > T{0}) total += q * std::log(q + static_cast<T>(kLossEps));
        }
    }
    return total;
}

template <typename T>
void consistency_regularizer_backward(const std::vector<Matrix<T>>& ps, T scale,
                                      std::vector<Matrix<T>>& grad_ps) {
    for (std::size_t v = 0; v < ps.size(); ++v) {
        const auto& p = ps[v];
        const T inv_m = T{1} / static_cast<T>(p.rows());
        for (std::size_t j = 0; j < p.cols(); ++j) {
            T q{0};
            for (std::size_t i = 0; i < p.rows(); ++i) q += p(i, j);
            q *= inv_m;
            const T g = scale * inv_m * (std::log(q + static_cast<T>(kLossEps)) + T{1});
            for (std::size_t i = 0; i < p.rows(); ++i) grad_ps[v](i, j) += g;
        }
    }
}

// Summed squared reconstruction error over all views and samples.
template <typename T>
T reconstruction_loss(const std::vector<Matrix<T>>& xs, const std::vector<Matrix<T>>& recs) {
    if (xs.size() != recs.size()) throw UsageError("reconstruction_loss: view count mismatch");
    T total{0};
    for (std::size_t v = 0; v < xs.size(); ++v) {
        if (xs[v].rows() != recs[v].rows() || xs[v].cols() != recs[v].cols())
            throw UsageError("reconstruction_loss: shape mismatch in view " + std::to_string(v));
        auto a = xs[v].data();
        auto b = recs[v].data();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const T d = a[i] - b[i];
            total += d * d;
        }
    }
    return total;
}

// scale * dL/dX~ = scale * 2 (X~ - X)
template <typename T>
void reconstruction_backward(const std::vector<Matrix<T>>& xs,
                             const std::vector<Matrix<T>>& recs, T scale,
                             std::vector<Matrix<T>>& grad_recs) {
    for (std::size_t v = 0; v < xs.size(); ++v) {
        auto a = xs[v].data();
        auto b = recs[v].data();
        auto g = grad_recs[v].data();
        for (std::size_t i = 0; i < a.size(); ++i) g[i] += scale * T{2} * (b[i] - a[i]);
    }
}

template <typename T>
struct LossBreakdown {
    T total{0};
    T pre{0};
    T contrastive{0};
    T consistency{0};
};

// L_fine = L_pre + alpha * L_c + beta * L_a
template <typename T>
LossBreakdown<T> fine_tune_loss(const std::vector<Matrix<T>>& xs,
                                const std::vector<Matrix<T>>& recs,
                                const std::vector<Matrix<T>>& ps, const LossWeights& w) {
    LossBreakdown<T> b;
    b.pre = reconstruction_loss(xs, recs);
    b.contrastive = cross_view_contrastive_loss(ps, static_cast<T>(w.tau));
    b.consistency = consistency_regularizer(ps);
    b.total = b.pre + static_cast<T>(w.alpha) * b.contrastive +
              static_cast<T>(w.beta) * b.consistency;
    return b;
}

}  // namespace cvcl
