#include "humble/dist_model.hpp"
#include "humble/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace humble;

namespace {

PopulationModel fig1() { return PopulationModel::equal_variance(-1.0, 1.0, 1.0, 0.5); }

}  // namespace

TEST_CASE("density matches the normal pdf") {
    const PopulationModel m = fig1();
    CHECK(density(m, 1.0, 1) == doctest::Approx(oracle::kPdfAtMean).epsilon(1e-15));
    CHECK(density(m, 0.0, 0) == density(m, 0.0, 1));
    CHECK(density(m, 1.0 + 10.0, 1) < 1e-20);
    for (double x = -5.0; x <= 5.0; x += 0.37) {
        CHECK(density(m, x, 0) == doctest::Approx(oracle::normal_pdf(x, -1.0, 1.0)).epsilon(1e-13));
        // Mirror symmetry of {N(-m, s), N(m, s)}.
        CHECK(density(m, x, 0) == doctest::Approx(density(m, -x, 1)).epsilon(1e-15));
    }
}

TEST_CASE("density integrates to one") {
    const GaussianConditional c(0.3, 1.7);
    const double mass = oracle::simpson([&](double x) { return c.pdf(x); }, 0.3 - 14 * 1.7, 0.3 + 14 * 1.7);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cdf values and limits") {
    const PopulationModel m = fig1();
    CHECK(cdf(m, -1.0, 0) == 0.5);
    CHECK(cdf(m, 1.0, 1) == 0.5);
    CHECK(cdf(m, 0.0, 0) == doctest::Approx(oracle::kPhi1).epsilon(1e-15));
    CHECK(cdf(m, 1e6, 0) == 1.0);
    CHECK(cdf(m, 1e6, 1) == 1.0);
    CHECK(cdf(m, -1e6, 1) == 0.0);
    for (double x = -4.0; x <= 4.0; x += 0.5)
        CHECK(cdf(m, x, 1) == doctest::Approx(oracle::normal_cdf_quad(x, 1.0, 1.0)).epsilon(1e-9));
}

TEST_CASE("cdf derivative matches density on a 1000-point grid") {
    const PopulationModel m = PopulationModel::equal_variance(-0.5, 1.5, 0.8, 0.4);
    for (Label y : {0, 1}) {
        const auto& c = m.conditional(y);
        const double lo = c.mean - 6 * c.stddev, hi = c.mean + 6 * c.stddev;
        double prev = -1.0;
        for (int i = 0; i < 1000; ++i) {
            const double x = lo + (hi - lo) * i / 999.0;
            const double h = 1e-4;
            const double deriv = (cdf(m, x + h, y) - cdf(m, x - h, y)) / (2 * h);
            CHECK(std::abs(deriv - density(m, x, y)) < 1e-6);
            const double v = cdf(m, x, y);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("model invariants are enforced") {
    CHECK_THROWS_AS(PopulationModel({-1, 1}, {1, 1}, 0.6, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(PopulationModel({-1, 1}, {1, 1}, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PopulationModel({1, 1}, {-1, 1}, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(GaussianConditional(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianConditional(0.0, -1.0), std::invalid_argument);
    CHECK_NOTHROW(PopulationModel({0, 1}, {0, 2}, 0.5, 0.5));
}

TEST_CASE("posterior is the Bayes posterior") {
    const PopulationModel m = PopulationModel::equal_variance(-1.0, 1.0, 1.0, 0.7);
    for (double x : {-3.0, -0.2, 0.0, 0.9, 4.0}) {
        const double a = 0.3 * oracle::normal_pdf(x, 1, 1);
        const double b = 0.7 * oracle::normal_pdf(x, -1, 1);
        CHECK(m.posterior1(x) == doctest::Approx(a / (a + b)).epsilon(1e-13));
    }
}

TEST_CASE("sample_population: label frequency and determinism") {
    const PopulationModel m = fig1();
    const auto a = sample_population(m, 1'000'000, 7);
    std::size_t ones = 0;
    for (const auto& s : a) ones += s.true_label;
    CHECK(std::abs(static_cast<double>(ones) / 1e6 - 0.5) < 0.002);

    const auto b = sample_population(m, 1000, 99);
    const auto c = sample_population(m, 1000, 99);
    REQUIRE(b.size() == c.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(b[i].x == c[i].x);
        CHECK(b[i].true_label == c[i].true_label);
        CHECK(b[i].individual_id == i);
    }
    const auto d = sample_population(m, 1000, 100);
    CHECK(d[0].x != b[0].x);

    CHECK_THROWS_AS(sample_population(m, 0, 1), std::invalid_argument);
}

TEST_CASE("sample_population: vanishing prior gives all label 0") {
    const double eps = 1e-9;
    const PopulationModel m({-1, 1}, {1, 1}, 1.0 - eps, eps);
    for (const auto& s : sample_population(m, 100, 3)) CHECK(s.true_label == 0);
}

TEST_CASE("empirical CDF stays inside the DKW band") {
    // Class-conditional check: the x values of label-1 samples against N(1,1).
    const PopulationModel m = fig1();
    const auto samples = sample_population(m, 1'000'000, 2024);
    std::vector<double> xs;
    for (const auto& s : samples)
        if (s.true_label == 1) xs.push_back(s.x);
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const double eps = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); i += 97) {
        const double f = cdf(m, xs[i], 1);
        worst = std::max({worst, std::abs((i + 1) / n - f), std::abs(i / n - f)});
    }
    CHECK(worst < eps);
}

TEST_CASE("grouped sampling respects weights and group models") {
    const GroupedPopulation pop({{"a", PopulationModel::equal_variance(-1, 1, 1, 0.5), 0.25},
                                 {"b", PopulationModel::equal_variance(-1.5, 0.5, 1, 0.5), 0.75}});
    const auto s = sample_population(pop, 200'000, 11);
    std::size_t a = 0;
    for (const auto& x : s) a += x.group_id == "a";
    CHECK(std::abs(static_cast<double>(a) / 2e5 - 0.25) < 0.005);
    CHECK_THROWS_AS(GroupedPopulation({}), std::invalid_argument);
    CHECK_THROWS_AS(GroupedPopulation({{"a", PopulationModel::equal_variance(-1, 1, 1, 0.5), 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(pop.group("zzz"), std::out_of_range);
}

TEST_CASE("sharpen scales stddevs only") {
    const PopulationModel m({-1.25, 0.9}, {0.75, 1.1}, 0.3, 0.7);
    const PopulationModel same = sharpen(m, 1.0);
    CHECK(same == m);
    const PopulationModel half = sharpen(m, 0.5);
    CHECK(half.cond0().stddev == 0.45);
    CHECK(half.cond1().stddev == 0.55);
    // Means and priors bitwise unchanged.
    CHECK(half.cond0().mean == m.cond0().mean);
    CHECK(half.cond1().mean == m.cond1().mean);
    CHECK(half.prior0() == m.prior0());
    CHECK(half.prior1() == m.prior1());
    CHECK_THROWS_AS(sharpen(m, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sharpen(m, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(sharpen(m, 1.01), std::invalid_argument);
}

TEST_CASE("rng: derived seeds and distributions") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));

    Rng rng(5);
    double sum = 0.0, sumsq = 0.0, beta_sum = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
        beta_sum += rng.beta(5.0, 2.0);
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sumsq / n - 1.0) < 0.01);
    CHECK(std::abs(beta_sum / n - 5.0 / 7.0) < 0.002);
}
