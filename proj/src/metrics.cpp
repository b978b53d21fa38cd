#include "cvcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvcl/losses.hpp"

namespace cvcl {

std::vector<int> predict_labels(const std::vector<Matrix<double>>& assignments) {
    if (assignments.empty()) throw UsageError("predict_labels: no views");
    const std::size_t n = assignments[0].rows();
    const std::size_t k = assignments[0].cols();
    for (const auto& p : assignments)
        if (p.rows() != n || p.cols() != k)
            throw UsageError("predict_labels: views are not row-aligned");
    std::vector<int> labels(n);
    const double inv_v = 1.0 / static_cast<double>(assignments.size());
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            double mean = 0;
            for (const auto& p : assignments) mean += p(i, j);
            mean *= inv_v;
            if (mean > best_val) {
                best_val = mean;
                best = static_cast<int>(j);
            }
        }
        labels[i] = best;
    }
    return labels;
}

std::vector<std::vector<long>> contingency_table(const std::vector<int>& pred,
                                                 const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw UsageError("contingency: length mismatch");
    if (pred.empty()) throw UsageError("contingency: empty label vectors");
    int k = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || truth[i] < 0) throw UsageError("contingency: negative label");
        k = std::max({k, pred[i] + 1, truth[i] + 1});
    }
    std::vector<std::vector<long>> table(k, std::vector<long>(k, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) table[pred[i]][truth[i]] += 1;
    return table;
}

namespace {

// O(n^3) optimal assignment (Kuhn-Munkres with potentials) on a square cost
// matrix; returns the minimum total cost.
double hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

double entropy_from_counts(const std::vector<long>& counts, double n) {
    double h = 0;
    for (long c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto table = contingency_table(pred, truth);
    const int k = static_cast<int>(table.size());
    long max_count = 0;
    for (const auto& row : table)
        for (long c : row) max_count = std::max(max_count, c);
    std::vector<std::vector<double>> cost(k, std::vector<double>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) cost[i][j] = static_cast<double>(max_count - table[i][j]);
    const double min_cost = hungarian_min_cost(cost);
    const double matched = static_cast<double>(max_count) * k - min_cost;
    return matched / static_cast<double>(pred.size());
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto table = contingency_table(pred, truth);
    const int k = static_cast<int>(table.size());
    const double n = static_cast<double>(pred.size());
    std::vector<long> row_sum(k, 0), col_sum(k, 0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            row_sum[i] += table[i][j];
            col_sum[j] += table[i][j];
        }
    double mi = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (table[i][j] > 0) {
                const double pij = static_cast<double>(table[i][j]) / n;
                const double pi = static_cast<double>(row_sum[i]) / n;
                const double pj = static_cast<double>(col_sum[j]) / n;
                mi += pij * std::log(pij / (pi * pj));
            }
        }
    const double hp = entropy_from_counts(row_sum, n);
    const double ht = entropy_from_counts(col_sum, n);
    if (hp == 0 && ht == 0) return 1.0;
    return 2.0 * mi / (hp + ht);
}

double purity(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto table = contingency_table(pred, truth);
    long matched = 0;
    for (const auto& row : table) matched += *std::max_element(row.begin(), row.end());
    return static_cast<double>(matched) / static_cast<double>(pred.size());
}

MetricsReport evaluate_clustering(const std::vector<int>& pred, const std::vector<int>& truth) {
    MetricsReport r;
    r.contingency = contingency_table(pred, truth);
    r.acc = accuracy(pred, truth);
    r.nmi = nmi(pred, truth);
    r.purity = purity(pred, truth);
    return r;
}

double contrastive_loss_lower_bound(int k, int m, double tau) {
    if (k < 1 || m < 1 || !(tau > 0)) throw ConfigError("contrastive_loss_lower_bound: K>=1, m>=1, tau>0");
    return std::exp(std::log(2.0 * k - 1.0) - static_cast<double>(m) / tau);
}

Matrix<double> build_strictly_aligned(const std::vector<int>& cluster_sizes) {
    std::size_t n = 0;
    for (int s : cluster_sizes) {
        if (s < 1) throw ConfigError("build_strictly_aligned: sizes must be positive");
        n += static_cast<std::size_t>(s);
    }
    Matrix<double> p(n, cluster_sizes.size());
    std::size_t row = 0;
    for (std::size_t c = 0; c < cluster_sizes.size(); ++c)
        for (int i = 0; i < cluster_sizes[c]; ++i) p(row++, c) = 1.0;
    return p;
}

Matrix<double> random_row_stochastic(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Matrix<double> p(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        auto r = p.row(i);
        double sum = 0;
        for (auto& v : r) {
            v = dist(rng) + 1e-9;
            sum += v;
        }
        for (auto& v : r) v /= sum;
    }
    return p;
}

AlignmentReport verify_strict_alignment_minimality(const std::vector<int>& cluster_sizes,
                                                   double tau, int n_trials,
                                                   std::uint64_t seed) {
    if (n_trials < 1) throw ConfigError("verify_strict_alignment_minimality: n_trials >= 1");
    const Matrix<double> aligned = build_strictly_aligned(cluster_sizes);
    AlignmentReport report;
    report.trials = n_trials;
    report.aligned_loss = pairwise_contrastive_loss(aligned, aligned, tau);
    report.bound = contrastive_loss_lower_bound(static_cast<int>(cluster_sizes.size()),
                                  static_cast<int>(aligned.rows()), tau);
    std::mt19937_64 rng(seed);
    double min_perturbed = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_trials; ++t) {
        const auto perturbed = random_row_stochastic(aligned.rows(), aligned.cols(), rng);
        min_perturbed = std::min(min_perturbed,
                                 pairwise_contrastive_loss(perturbed, perturbed, tau));
        min_perturbed = std::min(min_perturbed,
                                 pairwise_contrastive_loss(aligned, perturbed, tau));
    }
    report.min_perturbed = min_perturbed;
    report.aligned_is_min = report.aligned_loss <= min_perturbed;
    return report;
}

}  // namespace cvcl
