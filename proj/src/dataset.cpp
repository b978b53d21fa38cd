#include "cvcl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace cvcl {

std::vector<int> MultiviewDataset::view_dims() const {
    std::vector<int> d;
    for (const auto& v : views) d.push_back(static_cast<int>(v.cols()));
    return d;
}

void MultiviewDataset::validate() const {
    if (views.size() < 2) throw ConfigError("dataset must have at least 2 views");
    if (n_clusters < 2) throw ConfigError("dataset must have n_clusters >= 2");
    const std::size_t n = views[0].rows();
    for (std::size_t v = 1; v < views.size(); ++v) {
        if (views[v].rows() != n)
            throw RowCountMismatchError("view " + std::to_string(v + 1) + " has " +
                                        std::to_string(views[v].rows()) + " rows, expected " +
                                        std::to_string(n));
    }
    if (labels) {
        if (labels->size() != n)
            throw RowCountMismatchError("labels length " + std::to_string(labels->size()) +
                                        " != sample count " + std::to_string(n));
        std::set<int> distinct;
        for (int l : *labels) {
            if (l < 0 || l >= n_clusters)
                throw LabelInconsistencyError("label " + std::to_string(l) +
                                              " out of range 0.." +
                                              std::to_string(n_clusters - 1));
            distinct.insert(l);
        }
        if (static_cast<int>(distinct.size()) != n_clusters)
            throw LabelInconsistencyError("labels cover " + std::to_string(distinct.size()) +
                                          " clusters, meta says " + std::to_string(n_clusters));
    }
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Rejection-sample K centers with pairwise distance >= sep inside a box that
// grows on each restart.
std::vector<std::vector<double>> draw_centers(int k, int dim, double sep,
                                              std::mt19937_64& rng) {
    const double min_sq = sep * sep;
    double radius = sep * std::max(1.0, 0.75 * std::pow(static_cast<double>(k), 1.0 / dim));
    if (!std::isfinite(min_sq) || !std::isfinite(radius))
        throw GenerationError("center separation " + std::to_string(sep) +
                              " is too large to represent");
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::uniform_real_distribution<double> box(-radius, radius);
        std::vector<std::vector<double>> centers;
        bool ok = true;
        for (int c = 0; c < k && ok; ++c) {
            bool placed = false;
            for (int tries = 0; tries < 500 && !placed; ++tries) {
                std::vector<double> cand(dim);
                for (auto& x : cand) x = box(rng);
                placed = true;
                for (const auto& prev : centers)
                    if (sq_dist(cand, prev) < min_sq) {
                        placed = false;
                        break;
                    }
                if (placed) centers.push_back(std::move(cand));
            }
            ok = placed;
        }
        if (ok) return centers;
        radius *= 1.25;
    }
    throw GenerationError("could not place " + std::to_string(k) + " centers with separation " +
                          std::to_string(sep) + " in " + std::to_string(dim) + " dimensions");
}

}  // namespace

MultiviewDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_views < 2) throw ConfigError("synthetic: n_views must be >= 2");
    if (spec.n_clusters < 2) throw ConfigError("synthetic: n_clusters must be >= 2");
    if (spec.samples_per_cluster < 1) throw ConfigError("synthetic: samples_per_cluster >= 1");
    if (static_cast<int>(spec.dims_per_view.size()) != spec.n_views)
        throw ConfigError("synthetic: dims_per_view must list one dimension per view");
    if (spec.noise_sigma < 0) throw ConfigError("synthetic: noise_sigma must be >= 0");
    if (spec.view_disagreement < 0 || spec.view_disagreement > 1)
        throw ConfigError("synthetic: view_disagreement must be in [0,1]");

    std::mt19937_64 rng(spec.seed);
    const std::size_t n =
        static_cast<std::size_t>(spec.n_clusters) * static_cast<std::size_t>(spec.samples_per_cluster);

    MultiviewDataset ds;
    ds.n_clusters = spec.n_clusters;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = static_cast<int>(i / spec.samples_per_cluster);

    std::normal_distribution<double> noise(0.0, 1.0);
    for (int v = 0; v < spec.n_views; ++v) {
        const int d = spec.dims_per_view[v];
        if (d < 1) throw ConfigError("synthetic: view dimensions must be positive");
        auto centers = draw_centers(spec.n_clusters, d, spec.center_separation, rng);

        // Which samples of this view are drawn around a wrong center.
        std::vector<int> center_of(n);
        for (std::size_t i = 0; i < n; ++i) center_of[i] = labels[i];
        if (v > 0 && spec.view_disagreement > 0) {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            const std::size_t n_bad =
                static_cast<std::size_t>(spec.view_disagreement * static_cast<double>(n));
            std::uniform_int_distribution<int> other(0, spec.n_clusters - 2);
            for (std::size_t t = 0; t < n_bad; ++t) {
                const std::size_t i = order[t];
                int wrong = other(rng);
                if (wrong >= labels[i]) ++wrong;
                center_of[i] = wrong;
            }
        }

        Matrix<double> x(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c = centers[center_of[i]];
            auto r = x.row(i);
            for (int j = 0; j < d; ++j) r[j] = c[j] + spec.noise_sigma * noise(rng);
        }
        ds.views.push_back(std::move(x));
    }
    ds.labels = std::move(labels);
    ds.validate();
    return ds;
}

NormalizeMode parse_normalize_mode(const std::string& name) {
    if (name == "minmax") return NormalizeMode::MinMax;
    if (name == "zscore") return NormalizeMode::ZScore;
    if (name == "none") return NormalizeMode::None;
    throw ConfigError("unknown normalize mode '" + name + "' (minmax|zscore|none)");
}

MultiviewDataset normalize(const MultiviewDataset& ds, NormalizeMode mode) {
    if (mode == NormalizeMode::None) return ds;
    MultiviewDataset out = ds;
    for (auto& x : out.views) {
        const std::size_t n = x.rows();
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (mode == NormalizeMode::MinMax) {
                double lo = x(0, j), hi = x(0, j);
                for (std::size_t i = 1; i < n; ++i) {
                    lo = std::min(lo, x(i, j));
                    hi = std::max(hi, x(i, j));
                }
                const double span = hi - lo;
                for (std::size_t i = 0; i < n; ++i)
                    x(i, j) = span > 0 ? (x(i, j) - lo) / span : 0.0;
            } else {
                double mean = 0;
                for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
                mean /= static_cast<double>(n);
                double var = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = x(i, j) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(n);
                const double sd = std::sqrt(var);
                for (std::size_t i = 0; i < n; ++i)
                    x(i, j) = sd > 0 ? (x(i, j) - mean) / sd : 0.0;
            }
        }
    }
    return out;
}

void save_dataset(const MultiviewDataset& ds, const std::string& dir) {
    ds.validate();
    fs::create_directories(dir);
    nlohmann::json meta;
    meta["format_version"] = 1;
    meta["n_views"] = ds.n_views();
    meta["n_samples"] = ds.n_samples();
    meta["n_clusters"] = ds.n_clusters;
    meta["dims"] = ds.view_dims();
    meta["has_labels"] = ds.labels.has_value();
    {
        std::ofstream out(fs::path(dir) / "meta.json");
        if (!out) throw FormatError("cannot write " + dir + "/meta.json");
        out << meta.dump(2) << "\n";
    }
    char buf[64];
    for (std::size_t v = 0; v < ds.n_views(); ++v) {
        const auto path = fs::path(dir) / ("view_" + std::to_string(v + 1) + ".csv");
        std::ofstream out(path);
        if (!out) throw FormatError("cannot write " + path.string());
        const auto& x = ds.views[v];
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto r = x.row(i);
            for (std::size_t j = 0; j < x.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", r[j]);
                out << (j ? "," : "") << buf;
            }
            out << "\n";
        }
    }
    if (ds.labels) {
        std::ofstream out(fs::path(dir) / "labels.csv");
        for (int l : *ds.labels) out << l << "\n";
    }
}

namespace {

Matrix<double> load_csv_matrix(const fs::path& path, std::size_t rows, std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw FormatError("missing dataset file: " + path.string());
    Matrix<double> m(rows, cols);
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (i >= rows)
            throw RowCountMismatchError(path.string() + ": more rows than meta declares (" +
                                        std::to_string(rows) + ")");
        std::stringstream ss(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= cols)
                throw FormatError(path.string() + ": row " + std::to_string(i + 1) +
                                  " has more than " + std::to_string(cols) + " columns");
            std::size_t pos = 0;
            double val;
            try {
                val = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw MalformedNumberError(path.string() + ": bad number '" + cell + "' at row " +
                                           std::to_string(i + 1));
            }
            if (pos != cell.size())
                throw MalformedNumberError(path.string() + ": bad number '" + cell + "' at row " +
                                           std::to_string(i + 1));
            m(i, j++) = val;
        }
        if (j != cols)
            throw FormatError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                              std::to_string(j) + " columns, expected " + std::to_string(cols));
        ++i;
    }
    if (i != rows)
        throw RowCountMismatchError(path.string() + ": has " + std::to_string(i) +
                                    " rows, meta declares " + std::to_string(rows));
    return m;
}

}  // namespace

MultiviewDataset load_dataset(const std::string& dir) {
    const fs::path meta_path = fs::path(dir) / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw FormatError("missing dataset file: " + meta_path.string());
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(meta_path.string() + ": invalid JSON: " + e.what());
    }
    for (const char* key :
         {"format_version", "n_views", "n_samples", "n_clusters", "dims", "has_labels"}) {
        if (!meta.contains(key))
            throw FormatError(meta_path.string() + ": missing field '" + key + "'");
    }
    if (meta["format_version"].get<int>() != 1)
        throw FormatError(meta_path.string() + ": unsupported format_version");

    const std::size_t n_views = meta["n_views"].get<std::size_t>();
    const std::size_t n_samples = meta["n_samples"].get<std::size_t>();
    const auto dims = meta["dims"].get<std::vector<std::size_t>>();
    if (dims.size() != n_views)
        throw FormatError(meta_path.string() + ": dims length != n_views");

    MultiviewDataset ds;
    ds.n_clusters = meta["n_clusters"].get<int>();
    for (std::size_t v = 0; v < n_views; ++v) {
        const auto path = fs::path(dir) / ("view_" + std::to_string(v + 1) + ".csv");
        ds.views.push_back(load_csv_matrix(path, n_samples, dims[v]));
    }
    if (meta["has_labels"].get<bool>()) {
        const auto path = fs::path(dir) / "labels.csv";
        std::ifstream in(path);
        if (!in) throw FormatError("missing dataset file: " + path.string());
        std::vector<int> labels;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                std::size_t pos = 0;
                labels.push_back(std::stoi(line, &pos));
                if (pos != line.size()) throw std::invalid_argument(line);
            } catch (const std::exception&) {
                throw MalformedNumberError(path.string() + ": bad label '" + line + "'");
            }
        }
        ds.labels = std::move(labels);
    }
    ds.validate();
    return ds;
}

MinibatchPlan plan_epoch(std::size_t n, std::size_t m, std::uint64_t seed,
                         std::size_t epoch_index) {
    if (m < 1) throw ConfigError("batch size must be >= 1");
    if (m > n)
        throw ConfigError("batch size " + std::to_string(m) + " exceeds sample count " +
                          std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Distinct stream per epoch, reproducible across runs.
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (epoch_index + 1)));
    std::shuffle(order.begin(), order.end(), rng);
    MinibatchPlan plan;
    plan.batch_size = m;
    for (std::size_t start = 0; start < n; start += m) {
        const std::size_t end = std::min(n, start + m);
        plan.batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return plan;
}

}  // namespace cvcl
