#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cvcl/dataset.hpp"

namespace fs = std::filesystem;
using namespace cvcl;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cvcl_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

SyntheticSpec small_spec() {
    SyntheticSpec s;
    s.n_views = 2;
    s.n_clusters = 3;
    s.samples_per_cluster = 100;
    s.dims_per_view = {10, 12};
    s.seed = 7;
    return s;
}

}  // namespace

TEST_CASE("synthetic generation: construction basics") {
    const auto ds = generate_synthetic(small_spec());
    CHECK(ds.n_samples() == 300);
    CHECK(ds.n_views() == 2);
    CHECK(ds.views[0].cols() == 10);
    CHECK(ds.views[1].cols() == 12);
    REQUIRE(ds.labels.has_value());
    std::vector<int> counts(3, 0);
    for (int l : *ds.labels) counts[l]++;
    for (int c : counts) CHECK(c == 100);
}

TEST_CASE("synthetic generation is deterministic") {
    const auto a = generate_synthetic(small_spec());
    const auto b = generate_synthetic(small_spec());
    for (std::size_t v = 0; v < a.n_views(); ++v)
        for (std::size_t i = 0; i < a.views[v].size(); ++i)
            CHECK(a.views[v].data()[i] == b.views[v].data()[i]);
}

TEST_CASE("zero noise, zero disagreement: nearest-center assignment is exact") {
    SyntheticSpec s = small_spec();
    s.noise_sigma = 0.0;
    const auto ds = generate_synthetic(s);
    // All rows of a cluster coincide, so grouping by identical rows must
    // reproduce the labels.
    for (std::size_t v = 0; v < ds.n_views(); ++v) {
        for (std::size_t i = 0; i < ds.n_samples(); ++i) {
            for (std::size_t j = 0; j < ds.n_samples(); ++j) {
                const bool same_label = (*ds.labels)[i] == (*ds.labels)[j];
                bool same_row = true;
                for (std::size_t c = 0; c < ds.views[v].cols(); ++c)
                    if (ds.views[v](i, c) != ds.views[v](j, c)) same_row = false;
                CHECK(same_row == same_label);
            }
        }
    }
}

TEST_CASE("impossible geometry raises a generation error") {
    SyntheticSpec s = small_spec();
    s.dims_per_view = {1, 1};
    s.samples_per_cluster = 1;
    // sep^2 overflows to infinity, so no candidate pair can ever satisfy it.
    s.center_separation = 1e200;
    CHECK_THROWS_AS(generate_synthetic(s), GenerationError);
}

TEST_CASE("dataset round trip through the directory format") {
    const auto dir = temp_dir("roundtrip");
    const auto ds = generate_synthetic(small_spec());
    save_dataset(ds, dir.string());
    const auto back = load_dataset(dir.string());
    CHECK(back.n_clusters == ds.n_clusters);
    REQUIRE(back.labels.has_value());
    CHECK(*back.labels == *ds.labels);
    for (std::size_t v = 0; v < ds.n_views(); ++v)
        for (std::size_t i = 0; i < ds.views[v].size(); ++i)
            CHECK(std::abs(back.views[v].data()[i] - ds.views[v].data()[i]) < 1e-9);
}

TEST_CASE("row count mismatch across views is a named error") {
    MultiviewDataset ds;
    ds.views.emplace_back(300, 4);
    ds.views.emplace_back(299, 4);
    ds.n_clusters = 3;
    CHECK_THROWS_AS(ds.validate(), RowCountMismatchError);
}

TEST_CASE("missing meta file names the file") {
    const auto dir = temp_dir("nometa");
    try {
        load_dataset(dir.string());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("meta.json") != std::string::npos);
    }
}

TEST_CASE("malformed numerics are a named error") {
    const auto dir = temp_dir("badnum");
    const auto ds = generate_synthetic(small_spec());
    save_dataset(ds, dir.string());
    std::ofstream bad(dir / "view_1.csv", std::ios::trunc);
    for (std::size_t i = 0; i < ds.n_samples(); ++i) bad << "1.0,oops,3,4,5,6,7,8,9,10\n";
    bad.close();
    CHECK_THROWS_AS(load_dataset(dir.string()), MalformedNumberError);
}

TEST_CASE("labels inconsistent with K is a named error") {
    MultiviewDataset ds;
    ds.views.emplace_back(4, 2);
    ds.views.emplace_back(4, 2);
    ds.n_clusters = 3;
    ds.labels = std::vector<int>{0, 1, 0, 1};  // only 2 of 3 clusters used
    CHECK_THROWS_AS(ds.validate(), LabelInconsistencyError);
    ds.labels = std::vector<int>{0, 1, 2, 3};
    CHECK_THROWS_AS(ds.validate(), LabelInconsistencyError);
}

TEST_CASE("normalize: minmax and zscore column behavior") {
    MultiviewDataset ds;
    ds.views.push_back(Matrix<double>::from_rows({{1, 5, 0.0}, {2, 5, 0.5}, {3, 5, 1.0}}));
    ds.views.push_back(Matrix<double>::from_rows({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}));
    ds.n_clusters = 2;
    ds.labels = std::vector<int>{0, 1, 1};

    const auto mm = normalize(ds, NormalizeMode::MinMax);
    CHECK(mm.views[0](0, 0) == doctest::Approx(0.0));
    CHECK(mm.views[0](1, 0) == doctest::Approx(0.5));
    CHECK(mm.views[0](2, 0) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(mm.views[0](i, 1) == 0.0);  // constant column
        CHECK(std::abs(mm.views[0](i, 2) - ds.views[0](i, 2)) < 1e-12);  // already [0,1]
    }

    const auto zs = normalize(ds, NormalizeMode::ZScore);
    for (std::size_t i = 0; i < 3; ++i) CHECK(zs.views[0](i, 1) == 0.0);
    double mean = 0, var = 0;
    for (std::size_t i = 0; i < 3; ++i) mean += zs.views[0](i, 0);
    mean /= 3;
    for (std::size_t i = 0; i < 3; ++i) var += (zs.views[0](i, 0) - mean) * (zs.views[0](i, 0) - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var / 3 == doctest::Approx(1.0).epsilon(1e-12));

    const auto none = normalize(ds, NormalizeMode::None);
    CHECK(none.views[0](0, 0) == 1.0);
}

TEST_CASE("minibatch plan: shapes and edge cases") {
    auto one = plan_epoch(10, 10, 1, 0);
    REQUIRE(one.batches.size() == 1);
    std::set<std::size_t> seen(one.batches[0].begin(), one.batches[0].end());
    CHECK(seen.size() == 10);

    auto plan = plan_epoch(10, 3, 1, 0);
    REQUIRE(plan.batches.size() == 4);
    CHECK(plan.batches[0].size() == 3);
    CHECK(plan.batches[3].size() == 1);

    CHECK_THROWS_AS(plan_epoch(5, 6, 1, 0), ConfigError);
}

TEST_CASE("minibatch plans partition the index set") {
    for (std::size_t n : {7u, 10u, 33u, 100u}) {
        for (std::size_t m : {2u, 3u, 7u}) {
            if (m > n) continue;
            const auto plan = plan_epoch(n, m, 99, 5);
            std::set<std::size_t> seen;
            std::size_t total = 0;
            for (const auto& b : plan.batches) {
                CHECK(b.size() <= m);
                for (auto i : b) {
                    CHECK(i < n);
                    CHECK(!seen.count(i));
                    seen.insert(i);
                }
                total += b.size();
            }
            CHECK(total == n);
        }
    }
}

TEST_CASE("minibatch plans are reproducible and vary across epochs") {
    const auto a = plan_epoch(50, 8, 3, 2);
    const auto b = plan_epoch(50, 8, 3, 2);
    const auto c = plan_epoch(50, 8, 3, 3);
    CHECK(a.batches == b.batches);
    CHECK(a.batches != c.batches);
}
