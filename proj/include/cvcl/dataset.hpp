#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvcl/matrix.hpp"

namespace cvcl {

// Multiview dataset: one feature matrix per view over the same N samples.
// Immutable after construction; training never reads the labels.
struct MultiviewDataset {
    std::vector<Matrix<double>> views;
    std::optional<std::vector<int>> labels;
    int n_clusters = 0;

    std::size_t n_views() const { return views.size(); }
    std::size_t n_samples() const { return views.empty() ? 0 : views[0].rows(); }
    std::vector<int> view_dims() const;

    void validate() const;
};

struct SyntheticSpec {
    int n_views = 2;
    int n_clusters = 3;
    int samples_per_cluster = 100;
    std::vector<int> dims_per_view{10, 12};
    double center_separation = 4.0;
    double noise_sigma = 0.3;
    double view_disagreement = 0.0;  // fraction of samples per non-first view drawn
                                     // around a wrong cluster center
    std::uint64_t seed = 1;
};

// Gaussian blobs per view around cluster centers with pairwise distance >=
// center_separation. Deterministic given the seed.
MultiviewDataset generate_synthetic(const SyntheticSpec& spec);

enum class NormalizeMode { MinMax, ZScore, None };

NormalizeMode parse_normalize_mode(const std::string& name);

// Per-feature-column normalization; constant columns map to 0.
MultiviewDataset normalize(const MultiviewDataset& ds, NormalizeMode mode);

// Directory format: meta.json, view_1.csv .. view_n.csv, optional labels.csv.
void save_dataset(const MultiviewDataset& ds, const std::string& dir);
MultiviewDataset load_dataset(const std::string& dir);

// Seeded shuffle of 0..N-1 split into ceil(N/m) batches; the last batch may be
// smaller. Distinct per epoch_index, reproducible.
struct MinibatchPlan {
    std::vector<std::vector<std::size_t>> batches;
    std::size_t batch_size = 0;
};

MinibatchPlan plan_epoch(std::size_t n, std::size_t m, std::uint64_t seed,
                         std::size_t epoch_index);

// Rows of `src` selected by `idx`, in order.
template <typename T>
Matrix<T> gather_rows(const Matrix<T>& src, const std::vector<std::size_t>& idx) {
    Matrix<T> out(idx.size(), src.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto s = src.row(idx[i]);
        auto d = out.row(i);
        for (std::size_t j = 0; j < src.cols(); ++j) d[j] = s[j];
    }
    return out;
}

}  // namespace cvcl
