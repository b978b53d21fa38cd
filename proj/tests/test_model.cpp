#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "cvcl/checkpoint.hpp"
#include "cvcl/model.hpp"

using namespace cvcl;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.hidden = {6, 3};
    cfg.r1 = 3;
    cfg.r2 = 3;
    return cfg;
}

Matrix<double> random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2, 2);
    Matrix<double> m(r, c);
    for (auto& v : m.data()) v = dist(rng);
    return m;
}

}  // namespace

TEST_CASE("single-view model is rejected at construction") {
    CHECK_THROWS_AS(CvclModel<double>::make({4}, 2, tiny_config(), 1), ConfigError);
}

TEST_CASE("encoder width recipe: 5 hidden layers") {
    ModelConfig cfg;  // defaults
    const auto widths = CvclModel<double>::encoder_widths(784, cfg);
    CHECK(widths == std::vector<int>{784, 256, 512, 1024, 2048, 512});
}

TEST_CASE("zero input through zero-bias encoder gives zero embedding") {
    auto model = CvclModel<double>::make({4, 5}, 2, tiny_config(), 1);
    Matrix<double> x(3, 4);
    const auto z = model.encode(0, x);
    CHECK(z.rows() == 3);
    CHECK(z.cols() == 3);
    for (double v : z.data()) CHECK(v == 0.0);
    const auto rec = model.decode(0, z);
    for (double v : rec.data()) CHECK(v == 0.0);
}

TEST_CASE("embeddings are batch independent") {
    auto model = CvclModel<double>::make({4, 5}, 2, tiny_config(), 2);
    const auto row = random_matrix(1, 4, 9);
    Matrix<double> batch(32, 4);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 4; ++j) batch(i, j) = row(0, j);
    const auto z1 = model.encode(0, row);
    const auto z32 = model.encode(0, batch);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < z1.cols(); ++j)
            CHECK(z32(i, j) == doctest::Approx(z1(0, j)).epsilon(1e-14));
}

TEST_CASE("random inputs give finite embeddings of the right shape") {
    auto model = CvclModel<double>::make({4, 5}, 2, tiny_config(), 3);
    const auto z = model.encode(1, random_matrix(8, 5, 17));
    CHECK(z.rows() == 8);
    CHECK(z.cols() == 3);
    CHECK(z.all_finite());
}

TEST_CASE("cluster head: zero parameters give uniform rows") {
    auto model = CvclModel<double>::make({4, 5}, 4, tiny_config(), 4);
    for (auto& l : model.views()[0].head.layers()) {
        l.weights().fill(0.0);
        l.bias().fill(0.0);
    }
    const auto h = model.cluster_probabilities(0, random_matrix(5, 3, 21));
    for (double v : h.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("cluster head rows are probability distributions") {
    auto model = CvclModel<double>::make({4, 5}, 3, tiny_config(), 5);
    const auto h = model.cluster_probabilities(0, random_matrix(16, 3, 23));
    for (std::size_t i = 0; i < h.rows(); ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < h.cols(); ++j) {
            CHECK(h(i, j) >= 0.0);
            sum += h(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("scaling final head logits sharpens rows without changing argmax") {
    auto model = CvclModel<double>::make({4, 5}, 3, tiny_config(), 6);
    const auto z = random_matrix(10, 3, 29);
    const auto h1 = model.cluster_probabilities(0, z);
    auto& last = model.views()[0].head.layers().back();
    last.weights() *= 10.0;
    last.bias() *= 10.0;
    const auto h2 = model.cluster_probabilities(0, z);
    for (std::size_t i = 0; i < h1.rows(); ++i) {
        std::size_t arg1 = 0, arg2 = 0;
        double max1 = -1, max2 = -1;
        for (std::size_t j = 0; j < h1.cols(); ++j) {
            if (h1(i, j) > max1) { max1 = h1(i, j); arg1 = j; }
            if (h2(i, j) > max2) { max2 = h2(i, j); arg2 = j; }
        }
        CHECK(arg1 == arg2);
        CHECK(max2 >= max1);
    }
}

TEST_CASE("forward_all: shapes, determinism and row alignment") {
    auto model = CvclModel<double>::make({4, 5}, 3, tiny_config(), 7);
    std::vector<Matrix<double>> batches{random_matrix(7, 4, 31), random_matrix(7, 5, 37)};
    const auto out = model.forward_all(batches);
    for (std::size_t v = 0; v < 2; ++v) {
        CHECK(out.embeddings[v].rows() == 7);
        CHECK(out.embeddings[v].cols() == 3);
        CHECK(out.reconstructions[v].rows() == 7);
        CHECK(out.reconstructions[v].cols() == batches[v].cols());
        CHECK(out.assignments[v].rows() == 7);
        CHECK(out.assignments[v].cols() == 3);
    }
    const auto again = model.forward_all(batches);
    for (std::size_t v = 0; v < 2; ++v)
        for (std::size_t i = 0; i < out.assignments[v].size(); ++i)
            CHECK(out.assignments[v].data()[i] == again.assignments[v].data()[i]);

    std::vector<Matrix<double>> misaligned{random_matrix(7, 4, 41), random_matrix(6, 5, 43)};
    CHECK_THROWS_AS(model.forward_all(misaligned), UsageError);
}

TEST_CASE("checkpoint round trip preserves every parameter") {
    auto model = CvclModel<double>::make({4, 5}, 3, tiny_config(), 8);
    const auto path =
        (std::filesystem::temp_directory_path() / "cvcl_test_model.ckpt").string();
    save_checkpoint(model, path);
    auto back = load_checkpoint<double>(path);
    ParamStore<double> a, b;
    model.collect_params(a);
    back.collect_params(b);
    REQUIRE(a.size() == b.size());
    for (std::size_t p = 0; p < a.size(); ++p) {
        CHECK(a.entry(p).name == b.entry(p).name);
        REQUIRE(a.entry(p).value->size() == b.entry(p).value->size());
        for (std::size_t i = 0; i < a.entry(p).value->size(); ++i)
            CHECK(a.entry(p).value->data()[i] == b.entry(p).value->data()[i]);
    }
}
