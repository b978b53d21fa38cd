#pragma once

#include <functional>

#include "cvcl/optimizer.hpp"

namespace cvcl {

// Central finite differences over every parameter in a store. Test oracle
// only; loss_fn must be pure and deterministic.
template <typename T>
std::vector<Matrix<T>> finite_difference_gradient(const std::function<double()>& loss_fn,
                                                  ParamStore<T>& store, double step) {
    std::vector<Matrix<T>> grads;
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto& value = *store.entry(p).value;
        Matrix<T> g(value.rows(), value.cols());
        auto w = value.data();
        auto gd = g.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const T orig = w[i];
            w[i] = static_cast<T>(static_cast<double>(orig) + step);
            const double up = loss_fn();
            w[i] = static_cast<T>(static_cast<double>(orig) - step);
            const double down = loss_fn();
            w[i] = orig;
            gd[i] = static_cast<T>((up - down) / (2.0 * step));
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// Largest relative disagreement between analytic and numerical gradients;
// entries where both are below `floor` are ignored.
template <typename T>
double max_relative_gradient_error(const ParamStore<T>& store,
                                   const std::vector<Matrix<T>>& numeric,
                                   double floor = 1e-8) {
    double worst = 0;
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto a = store.entry(p).grad->data();
        auto n = numeric[p].data();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double av = static_cast<double>(a[i]);
            const double nv = static_cast<double>(n[i]);
            const double denom = std::max(std::abs(av), std::abs(nv));
            if (denom < floor) continue;
            worst = std::max(worst, std::abs(av - nv) / denom);
        }
    }
    return worst;
}

}  // namespace cvcl
