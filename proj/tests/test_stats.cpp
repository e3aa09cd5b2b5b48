#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ssco/rng.hpp"
#include "ssco/stats.hpp"

using namespace ssco;

namespace {

// O(n^2) oracle for tau-b: direct concordant/discordant/tie counting.
double kendall_tau_b_bruteforce(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                ++ties_x;
                ++ties_y;
            } else if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if (dx * dy > 0.0) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom = std::sqrt((n0 - static_cast<double>(ties_x)) * (n0 - static_cast<double>(ties_y)));
    if (denom <= 0.0) return 0.0;
    return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace

TEST_CASE("welch: identical samples give p = 1", "[stats]") {
    std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    REQUIRE(welch_test(a, a).p == Catch::Approx(1.0));
}

TEST_CASE("welch matches pooled t when variances are equal", "[stats]") {
    std::vector<double> a{5.1, 4.9, 5.0, 5.2, 4.8};
    std::vector<double> b{5.6, 5.4, 5.5, 5.7, 5.3};
    const auto r = welch_test(a, b);

    // Pooled two-sample t with equal group sizes and equal sample variances
    // coincides with Welch; cross-check the closed form.
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a), vb = sample_variance(b);
    const double na = 5.0, nb = 5.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    const double t_pooled = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    const double p_pooled = student_t_two_sided_p(t_pooled, na + nb - 2.0);
    REQUIRE(r.t == Catch::Approx(t_pooled).epsilon(1e-9));
    REQUIRE(r.p == Catch::Approx(p_pooled).margin(1e-6));
}

TEST_CASE("welch separates distant clusters", "[stats]") {
    std::vector<double> a{0.0, 0.001, -0.001, 0.0005};
    std::vector<double> b{1.0, 1.001, 0.999, 1.0005};
    REQUIRE(welch_test(a, b).p < 1e-4);
}

TEST_CASE("welch handles all-equal degenerate samples", "[stats]") {
    std::vector<double> a{2.0, 2.0, 2.0};
    std::vector<double> b{3.0, 3.0, 3.0};
    REQUIRE(welch_test(a, b).p == 0.0);
    REQUIRE(welch_test(a, a).p == 1.0);
}

TEST_CASE("kendall tau-b: perfect agreement and reversal", "[stats]") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{10, 20, 30, 40, 50};
    std::vector<double> yr{50, 40, 30, 20, 10};
    REQUIRE(kendall_tau_b(x, y) == Catch::Approx(1.0));
    REQUIRE(kendall_tau_b(x, yr) == Catch::Approx(-1.0));
}

TEST_CASE("kendall tau-b agrees with pair counting on random tied data", "[stats]") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(49);  // up to 50
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Small integer supports force plenty of ties.
            x[i] = static_cast<double>(rng.uniform_int(5));
            y[i] = static_cast<double>(rng.uniform_int(4));
        }
        const double fast = kendall_tau_b(x, y);
        const double slow = kendall_tau_b_bruteforce(x, y);
        REQUIRE(fast == Catch::Approx(slow).margin(1e-12));
    }
}

TEST_CASE("kendall tau-b on a hand-made tied ranking", "[stats]") {
    // x has a tie (2,2); y has a tie (5,5) placed discordantly.
    std::vector<double> x{1, 2, 2, 3};
    std::vector<double> y{5, 5, 7, 6};
    REQUIRE(kendall_tau_b(x, y) == Catch::Approx(kendall_tau_b_bruteforce(x, y)).margin(1e-12));
}

TEST_CASE("spearman on monotone data is 1", "[stats]") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> y{2, 4, 8, 16};
    REQUIRE(spearman_rho(x, y) == Catch::Approx(1.0));
}

TEST_CASE("bootstrap of a constant statistic is degenerate", "[stats]") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y{2, 4, 6, 8, 10, 12};
    Rng rng(5);
    const auto ci = bootstrap_ci_pairs(
        x, y, [](std::span<const double> a, std::span<const double> b) { return kendall_tau_b(a, b); },
        500, rng);
    REQUIRE(ci.point == Catch::Approx(1.0));
    REQUIRE(ci.lo == Catch::Approx(1.0));
    REQUIRE(ci.hi == Catch::Approx(1.0));
}

TEST_CASE("bootstrap CI contains the point estimate", "[stats]") {
    Rng rng(23);
    std::vector<double> x(40), y(40);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = 0.5 * x[i] + rng.normal();
    }
    const auto ci = bootstrap_ci_pairs(
        x, y, [](std::span<const double> a, std::span<const double> b) { return spearman_rho(a, b); },
        1000, rng);
    REQUIRE(ci.lo <= ci.point);
    REQUIRE(ci.point <= ci.hi);
}

TEST_CASE("sem is sample std over sqrt(n); halves when n quadruples", "[stats]") {
    std::vector<double> xs{3.0, 5.0, 7.0, 9.0};
    REQUIRE(sem(xs) == Catch::Approx(std::sqrt(sample_variance(xs) / 4.0)));
    // Same sample repeated 4x has (nearly) the same variance but 4x the count.
    std::vector<double> big;
    for (int r = 0; r < 4; ++r) big.insert(big.end(), xs.begin(), xs.end());
    const double ratio = sem(xs) / sem(big);
    // Repetition shrinks the sample variance by (n-1)-scaling only.
    const double var_ratio = sample_variance(xs) / sample_variance(big);
    REQUIRE(ratio == Catch::Approx(2.0 * std::sqrt(var_ratio)));
}
