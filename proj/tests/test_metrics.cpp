#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cvcl/metrics.hpp"

using namespace cvcl;

namespace {

// Brute-force clustering accuracy: best relabeling over all K! permutations.
double accuracy_bruteforce(const std::vector<int>& pred, const std::vector<int>& truth, int k) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (perm[pred[i]] == truth[i]) ++hits;
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(pred.size());
}

// Textbook NMI: 2 I(P;T) / (H(P) + H(T)), computed from joint frequencies.
double nmi_oracle(const std::vector<int>& pred, const std::vector<int>& truth) {
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    const double n = static_cast<double>(pred.size());
    std::vector<std::vector<double>> joint(kp, std::vector<double>(kt, 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) joint[pred[i]][truth[i]] += 1.0 / n;
    std::vector<double> mp(kp, 0.0), mt(kt, 0.0);
    for (int a = 0; a < kp; ++a)
        for (int b = 0; b < kt; ++b) {
            mp[a] += joint[a][b];
            mt[b] += joint[a][b];
        }
    double mi = 0, hp = 0, ht = 0;
    for (int a = 0; a < kp; ++a)
        for (int b = 0; b < kt; ++b)
            if (joint[a][b] > 0) mi += joint[a][b] * std::log(joint[a][b] / (mp[a] * mt[b]));
    for (double v : mp)
        if (v > 0) hp -= v * std::log(v);
    for (double v : mt)
        if (v > 0) ht -= v * std::log(v);
    if (hp == 0 && ht == 0) return 1.0;
    return 2.0 * mi / (hp + ht);
}

double purity_oracle(const std::vector<int>& pred, const std::vector<int>& truth) {
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    std::vector<std::vector<long>> counts(kp, std::vector<long>(kt, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) counts[pred[i]][truth[i]]++;
    long hit = 0;
    for (int a = 0; a < kp; ++a) hit += *std::max_element(counts[a].begin(), counts[a].end());
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    // Guarantee every cluster appears at least once.
    std::vector<int> out(n);
    for (int c = 0; c < k; ++c) out[c] = c;
    std::uniform_int_distribution<int> dist(0, k - 1);
    for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i) out[i] = dist(rng);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

}  // namespace

TEST_CASE("predict_labels: averaging and tie breaking") {
    std::vector<Matrix<double>> one{Matrix<double>::from_rows({{0.35, 0.65}})};
    CHECK(predict_labels(one) == std::vector<int>{1});

    std::vector<Matrix<double>> tie{Matrix<double>::from_rows({{0.5, 0.5}})};
    CHECK(predict_labels(tie) == std::vector<int>{0});  // lowest index wins

    // Averaging across views can overturn a single view's argmax.
    std::vector<Matrix<double>> two{Matrix<double>::from_rows({{0.9, 0.1}}),
                                    Matrix<double>::from_rows({{0.2, 0.8}})};
    CHECK(predict_labels(two) == std::vector<int>{0});  // (0.55, 0.45)

    std::vector<Matrix<double>> multi{
        Matrix<double>::from_rows({{0.1, 0.7, 0.2}, {0.4, 0.3, 0.3}, {0.2, 0.2, 0.6}})};
    CHECK(predict_labels(multi) == std::vector<int>{1, 0, 2});
}

TEST_CASE("accuracy: identity and permutation give 1") {
    std::vector<int> t{0, 0, 1, 1, 2, 2};
    CHECK(accuracy(t, t) == 1.0);
    std::vector<int> p{2, 2, 0, 0, 1, 1};
    CHECK(accuracy(p, t) == 1.0);
}

TEST_CASE("accuracy: hand example") {
    std::vector<int> t{0, 0, 0, 1, 1, 1};
    std::vector<int> p{0, 0, 1, 1, 1, 0};
    // Best bijection keeps labels as-is: 4/6 correct.
    CHECK(accuracy(p, t) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("accuracy matches K! brute force on random partitions") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> kd(2, 5);
    std::uniform_int_distribution<int> nd(10, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = kd(rng);
        const std::size_t n = static_cast<std::size_t>(nd(rng));
        const auto truth = random_labels(n, k, rng);
        const auto pred = random_labels(n, k, rng);
        CHECK(accuracy(pred, truth) ==
              doctest::Approx(accuracy_bruteforce(pred, truth, k)).epsilon(1e-12));
    }
}

TEST_CASE("accuracy handles unbalanced label alphabets") {
    // Predicted uses 3 clusters, truth uses 2; matching still works.
    std::vector<int> t{0, 0, 0, 1, 1, 1};
    std::vector<int> p{0, 0, 2, 1, 1, 1};
    CHECK(accuracy(p, t) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("nmi: reference values") {
    std::vector<int> t{0, 0, 1, 1};
    CHECK(nmi(t, t) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<int> perm{1, 1, 0, 0};
    CHECK(nmi(perm, t) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<int> collapsed{0, 0, 0, 0};
    CHECK(nmi(collapsed, t) == doctest::Approx(0.0).epsilon(1e-12));
    // Both partitions trivial: defined as 1.
    CHECK(nmi(collapsed, collapsed) == 1.0);
}

TEST_CASE("nmi matches the textbook oracle on random partitions") {
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<int> kd(2, 5);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = kd(rng);
        const auto truth = random_labels(40, k, rng);
        const auto pred = random_labels(40, k, rng);
        CHECK(nmi(pred, truth) == doctest::Approx(nmi_oracle(pred, truth)).epsilon(1e-12));
        CHECK(nmi(pred, truth) >= -1e-12);
        CHECK(nmi(pred, truth) <= 1.0 + 1e-12);
    }
}

TEST_CASE("purity: hand examples and oracle") {
    std::vector<int> t{0, 0, 1, 1, 1};
    std::vector<int> p{0, 1, 1, 1, 0};
    CHECK(purity(p, t) == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(purity(t, t) == 1.0);

    // All predictions in one cluster: purity is the largest class share.
    std::vector<int> one{0, 0, 0, 0, 0};
    CHECK(purity(one, t) == doctest::Approx(3.0 / 5.0).epsilon(1e-12));

    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 200; ++trial) {
        const auto truth = random_labels(30, 4, rng);
        const auto pred = random_labels(30, 4, rng);
        CHECK(purity(pred, truth) ==
              doctest::Approx(purity_oracle(pred, truth)).epsilon(1e-12));
        CHECK(purity(pred, truth) >= accuracy(pred, truth) - 1e-12);
    }
}

TEST_CASE("evaluate_clustering bundles the three metrics") {
    std::vector<int> t{0, 0, 1, 1, 2, 2};
    std::vector<int> p{0, 0, 1, 2, 2, 2};
    const auto rep = evaluate_clustering(p, t);
    CHECK(rep.acc == doctest::Approx(accuracy(p, t)).epsilon(1e-12));
    CHECK(rep.nmi == doctest::Approx(nmi(p, t)).epsilon(1e-12));
    CHECK(rep.purity == doctest::Approx(purity(p, t)).epsilon(1e-12));
    CHECK(rep.contingency.size() == 3);
}

TEST_CASE("metric input validation") {
    std::vector<int> a{0, 1}, b{0, 1, 2};
    CHECK_THROWS_AS(accuracy(a, b), UsageError);
    std::vector<int> empty;
    CHECK_THROWS_AS(accuracy(empty, empty), UsageError);
}

TEST_CASE("contrastive_loss_lower_bound: values and monotonicity") {
    CHECK(contrastive_loss_lower_bound(2, 2, 1.0) == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(contrastive_loss_lower_bound(2, 2, 1.0) == doctest::Approx(0.40601).epsilon(1e-4));
    CHECK(contrastive_loss_lower_bound(1, 1, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    // The identity example's loss 0.55144 sits above its bound.
    CHECK(contrastive_loss_lower_bound(2, 2, 1.0) < 0.551);
    // Decreasing in m, increasing in K and tau.
    CHECK(contrastive_loss_lower_bound(3, 16, 0.5) < contrastive_loss_lower_bound(3, 8, 0.5));
    CHECK(contrastive_loss_lower_bound(4, 8, 0.5) > contrastive_loss_lower_bound(3, 8, 0.5));
    CHECK(contrastive_loss_lower_bound(3, 8, 1.0) > contrastive_loss_lower_bound(3, 8, 0.5));
    // Large m/tau must underflow gracefully, not overflow.
    CHECK(contrastive_loss_lower_bound(6, 10000, 0.2) >= 0.0);
    CHECK(std::isfinite(contrastive_loss_lower_bound(6, 10000, 0.2)));
}

TEST_CASE("build_strictly_aligned structure") {
    const auto eye = build_strictly_aligned({1, 1});
    CHECK(eye.rows() == 2);
    CHECK(eye.cols() == 2);
    CHECK(eye(0, 0) == 1.0);
    CHECK(eye(0, 1) == 0.0);
    CHECK(eye(1, 1) == 1.0);

    const auto p = build_strictly_aligned({2, 3, 4});
    CHECK(p.rows() == 9);
    CHECK(p.cols() == 3);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < p.cols(); ++j) sum += p(i, j);
        CHECK(sum == 1.0);
    }
    // Distinct columns are orthogonal; the diagonal carries the block sizes.
    const std::vector<double> sizes{2, 3, 4};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            double dot = 0;
            for (std::size_t i = 0; i < p.rows(); ++i) dot += p(i, a) * p(i, b);
            CHECK(dot == (a == b ? sizes[a] : 0.0));
        }
}

TEST_CASE("random_row_stochastic produces valid rows deterministically") {
    std::mt19937_64 rng1(5), rng2(5);
    const auto a = random_row_stochastic(6, 4, rng1);
    const auto b = random_row_stochastic(6, 4, rng2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            CHECK(a(i, j) > 0.0);
            sum += a(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("alignment report: determinism and bound consistency") {
    const auto r1 = verify_strict_alignment_minimality({2, 3, 4}, 0.5, 50, 9);
    const auto r2 = verify_strict_alignment_minimality({2, 3, 4}, 0.5, 50, 9);
    CHECK(r1.aligned_loss == r2.aligned_loss);
    CHECK(r1.min_perturbed == r2.min_perturbed);
    CHECK(r1.trials == r2.trials);
    CHECK(r1.aligned_loss >= r1.bound);
    CHECK(r1.bound == doctest::Approx(contrastive_loss_lower_bound(3, 9, 0.5)).epsilon(1e-12));
}
