#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cvcl/matrix.hpp"

namespace cvcl {

// Per-sample label from per-view sharpened assignments: argmax over clusters
// of the view-averaged row, ties broken toward the lowest cluster index.
std::vector<int> predict_labels(const std::vector<Matrix<double>>& assignments);

struct MetricsReport {
    double acc = 0;
    double nmi = 0;
    double purity = 0;
    std::vector<std::vector<long>> contingency;  // predicted x true counts
};

// Best-bijection clustering accuracy (optimal assignment on the contingency
// table).
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Mutual information normalized by the arithmetic mean of the two partition
// entropies; 1 when both entropies are zero.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

double purity(const std::vector<int>& pred, const std::vector<int>& truth);

MetricsReport evaluate_clustering(const std::vector<int>& pred, const std::vector<int>& truth);

std::vector<std::vector<long>> contingency_table(const std::vector<int>& pred,
                                                 const std::vector<int>& truth);

// Lower bound (2K-1) e^{-m/tau} of the pairwise contrastive loss.
double contrastive_loss_lower_bound(int k, int m, double tau);

// Block one-hot assignment matrix: ones column per cluster block.
Matrix<double> build_strictly_aligned(const std::vector<int>& cluster_sizes);

// Uniform entries normalized per row.
Matrix<double> random_row_stochastic(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

struct AlignmentReport {
    double aligned_loss = 0;     // l(P, P) for the block one-hot P
    double min_perturbed = 0;    // min of l over all perturbed evaluations
    double bound = 0;            // contrastive_loss_lower_bound(K, N, tau)
    int trials = 0;
    bool aligned_is_min = false;
};

// Compares l(P,P) for the aligned P against l(P',P') and l(P,P') over random
// row-stochastic perturbations.
AlignmentReport verify_strict_alignment_minimality(const std::vector<int>& cluster_sizes,
                                                   double tau, int n_trials,
                                                   std::uint64_t seed);

}  // namespace cvcl
