#pragma once

#include <random>
#include <string>
#include <vector>

#include "cvcl/layer.hpp"
#include "cvcl/optimizer.hpp"

namespace cvcl {

struct ModelConfig {
    // Intermediate encoder widths between the input and the embedding r1.
    std::vector<int> hidden{256, 512, 1024, 2048};
    int r1 = 512;
    int r2 = 256;
    bool head_relu = false;  // optional nonlinearity between the two head layers
};

// One view's encoder, mirrored decoder and cluster head.
template <typename T>
struct ViewNetwork {
    Mlp<T> encoder;
    Mlp<T> decoder;
    Mlp<T> head;

    std::size_t input_width() const { return encoder.layers().front().in_width(); }
    std::size_t embedding_width() const { return encoder.layers().back().out_width(); }
    std::size_t n_clusters() const { return head.layers().back().out_width(); }
};

template <typename T>
struct ForwardAll {
    std::vector<Matrix<T>> embeddings;       // Z per view
    std::vector<Matrix<T>> reconstructions;  // X~ per view
    std::vector<Matrix<T>> assignments;      // H per view
};

template <typename T>
class CvclModel {
public:
    CvclModel() = default;

    static CvclModel make(const std::vector<int>& view_dims, int n_clusters,
                          const ModelConfig& cfg, std::uint64_t seed) {
        if (view_dims.size() < 2) throw ConfigError("a CVCL model needs at least 2 views");
        if (n_clusters < 2) throw ConfigError("n_clusters must be >= 2");
        if (cfg.r1 < 1 || cfg.r2 < 1) throw ConfigError("r1 and r2 must be positive");
        for (int h : cfg.hidden)
            if (h < 1) throw ConfigError("hidden widths must be positive");
        CvclModel m;
        m.cfg_ = cfg;
        m.n_clusters_ = n_clusters;
        std::mt19937_64 rng(seed);
        for (int d : view_dims) {
            if (d < 1) throw ConfigError("view dimension must be positive");
            m.views_.push_back(make_view(d, n_clusters, cfg, rng));
        }
        return m;
    }

    // [d_v, hidden..., r1]
    static std::vector<int> encoder_widths(int d_v, const ModelConfig& cfg) {
        std::vector<int> w{d_v};
        w.insert(w.end(), cfg.hidden.begin(), cfg.hidden.end());
        w.push_back(cfg.r1);
        return w;
    }

    std::size_t n_views() const { return views_.size(); }
    int n_clusters() const { return n_clusters_; }
    const ModelConfig& config() const { return cfg_; }
    std::vector<ViewNetwork<T>>& views() { return views_; }
    const std::vector<ViewNetwork<T>>& views() const { return views_; }

    std::vector<int> view_dims() const {
        std::vector<int> d;
        for (const auto& v : views_) d.push_back(static_cast<int>(v.input_width()));
        return d;
    }

    Matrix<T> encode(std::size_t v, const Matrix<T>& x) { return view(v).encoder.forward(x); }
    Matrix<T> decode(std::size_t v, const Matrix<T>& z) { return view(v).decoder.forward(z); }
    Matrix<T> cluster_probabilities(std::size_t v, const Matrix<T>& z) {
        return view(v).head.forward(z);
    }

    // Forward every view on row-aligned batches; caches are kept for backward.
    ForwardAll<T> forward_all(const std::vector<Matrix<T>>& batches) {
        if (batches.size() != views_.size())
            throw UsageError("forward_all: got " + std::to_string(batches.size()) +
                             " batches for " + std::to_string(views_.size()) + " views");
        for (std::size_t v = 1; v < batches.size(); ++v)
            if (batches[v].rows() != batches[0].rows())
                throw UsageError("forward_all: batches are not row-aligned across views");
        ForwardAll<T> out;
        for (std::size_t v = 0; v < views_.size(); ++v) {
            Matrix<T> z = encode(v, batches[v]);
            out.reconstructions.push_back(decode(v, z));
            out.assignments.push_back(cluster_probabilities(v, z));
            out.embeddings.push_back(std::move(z));
        }
        return out;
    }

    // Registration order: per view, encoder then decoder then head, each layer
    // contributing weights then bias. Deterministic for a fixed config.
    void collect_params(ParamStore<T>& store, bool include_heads = true) {
        for (std::size_t v = 0; v < views_.size(); ++v) {
            add_mlp(store, views_[v].encoder, "view" + std::to_string(v) + ".encoder");
            add_mlp(store, views_[v].decoder, "view" + std::to_string(v) + ".decoder");
            if (include_heads)
                add_mlp(store, views_[v].head, "view" + std::to_string(v) + ".head");
        }
    }

private:
    ViewNetwork<T>& view(std::size_t v) {
        if (v >= views_.size()) throw UsageError("view index out of range");
        return views_[v];
    }

    static ViewNetwork<T> make_view(int d_v, int k, const ModelConfig& cfg,
                                    std::mt19937_64& rng) {
        ViewNetwork<T> vn;
        const std::vector<int> enc = encoder_widths(d_v, cfg);
        std::vector<DenseLayer<T>> e;
        for (std::size_t i = 0; i + 1 < enc.size(); ++i) {
            const bool last = (i + 2 == enc.size());
            e.emplace_back(enc[i], enc[i + 1], last ? Activation::Identity : Activation::ReLU);
        }
        std::vector<DenseLayer<T>> d;
        for (std::size_t i = enc.size() - 1; i > 0; --i) {
            const bool last = (i == 1);
            d.emplace_back(enc[i], enc[i - 1], last ? Activation::Identity : Activation::ReLU);
        }
        std::vector<DenseLayer<T>> h;
        h.emplace_back(cfg.r1, cfg.r2, cfg.head_relu ? Activation::ReLU : Activation::Identity);
        h.emplace_back(cfg.r2, k, Activation::Softmax);
        vn.encoder = Mlp<T>(std::move(e));
        vn.decoder = Mlp<T>(std::move(d));
        vn.head = Mlp<T>(std::move(h));
        for (auto* mlp : {&vn.encoder, &vn.decoder, &vn.head})
            for (auto& l : mlp->layers()) l.init(rng);
        return vn;
    }

    static void add_mlp(ParamStore<T>& store, Mlp<T>& mlp, const std::string& prefix) {
        for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
            auto& l = mlp.layers()[i];
            store.add(prefix + ".layer" + std::to_string(i) + ".weights", &l.weights(),
                      &l.grad_weights());
            store.add(prefix + ".layer" + std::to_string(i) + ".bias", &l.bias(), &l.grad_bias());
        }
    }

    std::vector<ViewNetwork<T>> views_;
    ModelConfig cfg_;
    int n_clusters_ = 0;
};

}  // namespace cvcl
