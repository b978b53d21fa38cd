#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvcl/matrix.hpp"

namespace cvcl {

// Ordered view over every learnable array of a model, with optimizer state
// allocated lazily on the first step. Parameter order is fixed by the
// registration order, which the model derives from its configuration.
template <typename T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Matrix<T>* value;
        Matrix<T>* grad;
    };

    void add(std::string name, Matrix<T>* value, Matrix<T>* grad) {
        entries_.push_back({std::move(name), value, grad});
    }

    std::size_t size() const { return entries_.size(); }
    const Entry& entry(std::size_t i) const { return entries_[i]; }

    void zero_grads() {
        for (auto& e : entries_) e.grad->fill(T{0});
    }

    // Global L2 norm of all gradients.
    double grad_norm() const {
        double s = 0;
        for (const auto& e : entries_)
            for (T v : e.grad->data()) s += static_cast<double>(v) * static_cast<double>(v);
        return std::sqrt(s);
    }

    void scale_grads(T s) {
        for (auto& e : entries_)
            for (auto& v : e.grad->data()) v *= s;
    }

    std::vector<Matrix<T>>& moment1() { return m1_; }
    std::vector<Matrix<T>>& moment2() { return m2_; }
    std::uint64_t& step_count() { return steps_; }

private:
    std::vector<Entry> entries_;
    std::vector<Matrix<T>> m1_;  // momentum velocity / Adam first moment
    std::vector<Matrix<T>> m2_;  // Adam second moment
    std::uint64_t steps_ = 0;
};

struct OptimizerConfig {
    enum class Kind { Adam, Momentum };
    Kind kind = Kind::Adam;
    double learning_rate = 1e-3;
    double momentum = 0.9;  // classic momentum only
    double beta1 = 0.9;     // Adam
    double beta2 = 0.999;   // Adam
    double eps = 1e-8;      // Adam
    double weight_decay = 0.0;
};

// One in-place update. Deterministic given the prior optimizer state.
template <typename T>
void optimizer_step(ParamStore<T>& store, const OptimizerConfig& cfg) {
    if (store.moment1().size() != store.size()) {
        store.moment1().clear();
        store.moment2().clear();
        for (std::size_t i = 0; i < store.size(); ++i) {
            const auto& e = store.entry(i);
            store.moment1().emplace_back(e.value->rows(), e.value->cols());
            store.moment2().emplace_back(e.value->rows(), e.value->cols());
        }
    }
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (!store.entry(i).grad->all_finite())
            throw NumericError("non-finite gradient in parameter " + std::to_string(i) + " (" +
                               store.entry(i).name + ")");
    }
    store.step_count() += 1;
    const double t = static_cast<double>(store.step_count());
    for (std::size_t i = 0; i < store.size(); ++i) {
        auto w = store.entry(i).value->data();
        auto g = store.entry(i).grad->data();
        auto m1 = store.moment1()[i].data();
        auto m2 = store.moment2()[i].data();
        for (std::size_t k = 0; k < w.size(); ++k) {
            double gk = static_cast<double>(g[k]) + cfg.weight_decay * static_cast<double>(w[k]);
            if (cfg.kind == OptimizerConfig::Kind::Momentum) {
                double v = cfg.momentum * static_cast<double>(m1[k]) - cfg.learning_rate * gk;
                m1[k] = static_cast<T>(v);
                w[k] = static_cast<T>(static_cast<double>(w[k]) + v);
            } else {
                double a = cfg.beta1 * static_cast<double>(m1[k]) + (1.0 - cfg.beta1) * gk;
                double b = cfg.beta2 * static_cast<double>(m2[k]) + (1.0 - cfg.beta2) * gk * gk;
                m1[k] = static_cast<T>(a);
                m2[k] = static_cast<T>(b);
                const double ahat = a / (1.0 - std::pow(cfg.beta1, t));
                const double bhat = b / (1.0 - std::pow(cfg.beta2, t));
                w[k] = static_cast<T>(static_cast<double>(w[k]) -
                                      cfg.learning_rate * ahat / (std::sqrt(bhat) + cfg.eps));
            }
        }
    }
}

}  // namespace cvcl
