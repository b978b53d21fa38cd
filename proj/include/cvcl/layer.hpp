#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "cvcl/matrix.hpp"

namespace cvcl {

enum class Activation { Identity, ReLU, Softmax };

// Row-wise softmax with max subtraction.
template <typename T>
void softmax_rows(Matrix<T>& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        T mx = r[0];
        for (T v : r) mx = std::max(mx, v);
        T sum{0};
        for (auto& v : r) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (auto& v : r) v /= sum;
    }
}

// Fully connected layer with cached forward state for backprop.
template <typename T>
class DenseLayer {
public:
    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, Activation act)
        : weights_(in, out), bias_(1, out), grad_w_(in, out), grad_b_(1, out), act_(act) {}

    std::size_t in_width() const { return weights_.rows(); }
    std::size_t out_width() const { return weights_.cols(); }
    Activation activation() const { return act_; }

    Matrix<T>& weights() { return weights_; }
    const Matrix<T>& weights() const { return weights_; }
    Matrix<T>& bias() { return bias_; }
    const Matrix<T>& bias() const { return bias_; }
    Matrix<T>& grad_weights() { return grad_w_; }
    Matrix<T>& grad_bias() { return grad_b_; }

    // Uniform fan-in scaled init, bias zero.
    void init(std::mt19937_64& rng) {
        const double s = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, in_width())));
        std::uniform_real_distribution<double> dist(-s, s);
        for (auto& v : weights_.data()) v = static_cast<T>(dist(rng));
        bias_.fill(T{0});
    }

    Matrix<T> forward(const Matrix<T>& input) {
        if (input.cols() != in_width())
            throw ConfigError("dense_forward: input width " + std::to_string(input.cols()) +
                              " != layer width " + std::to_string(in_width()));
        input_ = input;
        Matrix<T> out = multiply(input, weights_);
        for (std::size_t i = 0; i < out.rows(); ++i) {
            auto r = out.row(i);
            for (std::size_t j = 0; j < out.cols(); ++j) r[j] += bias_(0, j);
        }
        switch (act_) {
            case Activation::Identity:
                break;
            case Activation::ReLU:
                for (auto& v : out.data()) v = std::max(v, T{0});
                break;
            case Activation::Softmax:
                softmax_rows(out);
                break;
        }
        output_ = out;
        has_cache_ = true;
        return out;
    }

    // Accumulates parameter gradients, returns gradient w.r.t. the input.
    // ReLU subgradient at 0 is 0.
    Matrix<T> backward(const Matrix<T>& grad_out) {
        if (!has_cache_) throw UsageError("backward called without a matching forward");
        if (grad_out.rows() != output_.rows() || grad_out.cols() != output_.cols())
            throw UsageError("backward: gradient shape does not match cached output");
        Matrix<T> grad_pre = grad_out;
        switch (act_) {
            case Activation::Identity:
                break;
            case Activation::ReLU:
                for (std::size_t i = 0; i < grad_pre.size(); ++i) {
                    if (output_.data()[i] <= T{0}) grad_pre.data()[i] = T{0};
                }
                break;
            case Activation::Softmax:
                for (std::size_t i = 0; i < grad_pre.rows(); ++i) {
                    auto g = grad_pre.row(i);
                    auto h = output_.row(i);
                    T dot{0};
                    for (std::size_t j = 0; j < g.size(); ++j) dot += g[j] * h[j];
                    for (std::size_t j = 0; j < g.size(); ++j) g[j] = h[j] * (g[j] - dot);
                }
                break;
        }
        grad_w_ += multiply_at_b(input_, grad_pre);
        for (std::size_t i = 0; i < grad_pre.rows(); ++i) {
            auto r = grad_pre.row(i);
            for (std::size_t j = 0; j < grad_pre.cols(); ++j) grad_b_(0, j) += r[j];
        }
        return multiply_a_bt(grad_pre, weights_);
    }

    void zero_grads() {
        grad_w_.fill(T{0});
        grad_b_.fill(T{0});
    }

private:
    Matrix<T> weights_;
    Matrix<T> bias_;
    Matrix<T> grad_w_;
    Matrix<T> grad_b_;
    Matrix<T> input_;
    Matrix<T> output_;
    Activation act_ = Activation::Identity;
    bool has_cache_ = false;
};

// A stack of dense layers sharing one forward/backward cache.
template <typename T>
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<DenseLayer<T>> layers) : layers_(std::move(layers)) {}

    std::vector<DenseLayer<T>>& layers() { return layers_; }
    const std::vector<DenseLayer<T>>& layers() const { return layers_; }

    Matrix<T> forward(const Matrix<T>& input) {
        Matrix<T> x = input;
        for (auto& l : layers_) x = l.forward(x);
        return x;
    }

    Matrix<T> backward(const Matrix<T>& grad_out) {
        Matrix<T> g = grad_out;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = it->backward(g);
        return g;
    }

private:
    std::vector<DenseLayer<T>> layers_;
};

}  // namespace cvcl
