#include "humble/decision_core.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace humble;

namespace {

PopulationModel fig1() { return PopulationModel::equal_variance(-1.0, 1.0, 1.0, 0.5); }

}  // namespace

TEST_CASE("lr_threshold") {
    CHECK(lr_threshold(CostSpec(1, 1), 0.5, 0.5) == 1.0);
    CHECK(lr_threshold(CostSpec(9, 1), 0.5, 0.5) == 9.0);
    CHECK(lr_threshold(CostSpec(1, 1), 0.9, 0.1) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK_THROWS_AS(lr_threshold(CostSpec(1, 1), 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec(1, -1), std::invalid_argument);
    CHECK_THROWS_AS(CostSpec(std::numeric_limits<double>::infinity(), 1), std::invalid_argument);
}

TEST_CASE("threshold_x: closed form against the density-ratio bisection oracle") {
    const PopulationModel m = fig1();
    CHECK(threshold_x(m, 1.0) == 0.0);
    CHECK(threshold_x(m, 9.0) == doctest::Approx(oracle::kHalfLn9).epsilon(1e-15));
    CHECK(std::abs(threshold_x(m, 9.0) - oracle::ratio_root(-1, 1, 1, 9.0)) < 1e-10);
    CHECK(std::abs(threshold_x(m, 1.0 / 9.0) + oracle::kHalfLn9) < 1e-10);
    CHECK(std::abs(threshold_x(m, 1.0 / 9.0) - oracle::ratio_root(-1, 1, 1, 1.0 / 9.0)) < 1e-10);

    const PopulationModel skew = PopulationModel::equal_variance(0.3, 2.1, 0.7, 0.35);
    for (double eta : {0.01, 0.3, 1.0, 4.0, 81.0}) {
        const double x = threshold_x(skew, eta);
        CHECK(std::abs(x - oracle::ratio_root(0.3, 2.1, 0.7, eta)) < 1e-10);
        CHECK(std::abs(x - threshold_x_bisection(skew, eta)) < 1e-10);
        // LR(x_star) = eta.
        CHECK(std::exp(log_likelihood_ratio(skew, x)) == doctest::Approx(eta).epsilon(1e-10));
    }
}

TEST_CASE("threshold_x rejects non-monotone likelihood ratios") {
    const PopulationModel unequal({-1, 1}, {1, 2}, 0.5, 0.5);
    CHECK_THROWS_AS(threshold_x(unequal, 1.0), UnsupportedModel);
    CHECK_THROWS_AS(threshold_x_bisection(unequal, 1.0), UnsupportedModel);
    const PopulationModel same_mean({0, 1}, {0, 1}, 0.5, 0.5);
    CHECK_THROWS_AS(threshold_x(same_mean, 1.0), UnsupportedModel);
    CHECK_THROWS_AS(threshold_x(fig1(), 0.0), std::invalid_argument);
}

TEST_CASE("threshold monotone in eta, so FPR falls and FNR rises with the cost ratio") {
    const PopulationModel m = fig1();
    double prev_x = -1e9, prev_fpr = 2.0, prev_fnr = -1.0;
    for (double ratio : {0.1, 0.5, 1.0, 3.0, 9.0, 27.0, 81.0}) {
        const DecisionRule r = bayes_rule(m, CostSpec(ratio, 1.0));
        const ErrorRates e = error_rates_analytic(m, r);
        CHECK(r.x_star > prev_x);
        CHECK(e.fpr < prev_fpr);
        CHECK(e.fnr > prev_fnr);
        prev_x = r.x_star;
        prev_fpr = e.fpr;
        prev_fnr = e.fnr;
    }
}

TEST_CASE("classify tie-breaking and flip") {
    const DecisionRule r{0.0, 1.0};
    CHECK(classify(r, 0.5) == 1);
    CHECK(classify(r, -0.5) == 0);
    CHECK(classify(r, 0.0) == 0);
    const DecisionRule s = bayes_rule(fig1(), CostSpec(9, 1));
    CHECK(classify(s, s.x_star - 1e-9) == 0);
    CHECK(classify(s, s.x_star + 1e-9) == 1);
}

TEST_CASE("error_rates_analytic") {
    const PopulationModel m = fig1();
    const ErrorRates a = error_rates_analytic(m, DecisionRule{0.0, 1.0});
    CHECK(a.fpr == doctest::Approx(oracle::kTailPhi1).epsilon(1e-14));
    CHECK(a.fnr == doctest::Approx(oracle::kTailPhi1).epsilon(1e-14));
    CHECK(std::abs(a.fpr - a.fnr) < 1e-12);
    CHECK(a.fpr + a.tnr == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a.fnr + a.tpr == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a.deferral_rate == 0.0);

    const ErrorRates b = error_rates_analytic(m, rule_at(m, oracle::kHalfLn9));
    CHECK(b.fpr == doctest::Approx(oracle::kFprAtHalfLn9).epsilon(1e-12));
    CHECK(b.fnr == doctest::Approx(oracle::kFnrAtHalfLn9).epsilon(1e-12));
    // Rounded values quoted alongside the cost-9 illustration.
    CHECK(std::abs(b.fpr - 0.017943) < 2e-5);
    CHECK(std::abs(b.fnr - 0.539270) < 1e-5);
    // Quadrature oracle.
    CHECK(b.fnr == doctest::Approx(oracle::normal_cdf_quad(oracle::kHalfLn9, 1, 1)).epsilon(1e-9));

    const ErrorRates c = error_rates_analytic(m, rule_at(m, reject_all_threshold(m)));
    CHECK(c.fpr == 0.0);
    CHECK(c.fnr == 1.0);
    const ErrorRates d = error_rates_analytic(m, rule_at(m, accept_all_threshold(m)));
    CHECK(d.fpr == 1.0);
    CHECK(d.fnr == 0.0);
}

TEST_CASE("error_rates_mc agrees with the analytic areas") {
    const PopulationModel m = fig1();
    const DecisionRule r = bayes_rule(m, CostSpec(1, 1));
    const ErrorRates a = error_rates_analytic(m, r);
    const ErrorRates x = error_rates_mc(m, r, 1'000'000, 1);
    const ErrorRates y = error_rates_mc(m, r, 1'000'000, 2);
    CHECK(std::abs(x.fpr - a.fpr) <= 3 * x.stderr_fpr);
    CHECK(std::abs(x.fnr - a.fnr) <= 3 * x.stderr_fnr);
    CHECK(std::abs(y.fpr - a.fpr) <= 3 * y.stderr_fpr);
    CHECK(x.fpr != y.fpr);
    CHECK(x.stderr_fpr > 0.0);

    const ErrorRates z1 = error_rates_mc(m, r, 1'000'000, 1);
    CHECK(z1.fpr == x.fpr);

    const ErrorRates one = error_rates_mc(m, r, 1, 5);
    CHECK((one.fpr == 0.0 || one.fpr == 1.0));
    CHECK((one.fnr == 0.0 || one.fnr == 1.0));
    CHECK_THROWS_AS(error_rates_mc(m, r, 0, 5), std::invalid_argument);
}

TEST_CASE("bayes_risk and regret") {
    const PopulationModel m = fig1();
    const CostSpec unit(1, 1);
    const RiskReport best = bayes_risk(m, unit, bayes_rule(m, unit));
    CHECK(best.risk == doctest::Approx(oracle::kTailPhi1).epsilon(1e-14));
    CHECK(best.regret == 0.0);
    CHECK(best.threshold_used == 0.0);

    const RiskReport shifted = bayes_risk(m, unit, rule_at(m, 0.5));
    CHECK(shifted.regret > 0.0);

    const CostSpec scaled(10, 10);
    const RiskReport best10 = bayes_risk(m, scaled, bayes_rule(m, scaled));
    CHECK(best10.risk == doctest::Approx(10 * best.risk).epsilon(1e-14));
    CHECK(bayes_rule(m, scaled).x_star == bayes_rule(m, unit).x_star);
}

TEST_CASE("Bayes rule beats a dense threshold grid") {
    const PopulationModel m = PopulationModel::equal_variance(-0.4, 1.3, 0.9, 0.65);
    const CostSpec costs(3.5, 0.8);
    const RiskReport best = bayes_risk(m, costs, bayes_rule(m, costs));
    const double lo = -0.4 - 6 * 0.9, hi = 1.3 + 6 * 0.9;
    for (int i = 0; i < 10000; ++i) {
        const double t = lo + (hi - lo) * i / 9999.0;
        CHECK(best.risk <= bayes_risk(m, costs, rule_at(m, t)).risk + 1e-15);
    }
}

TEST_CASE("mirroring the model and swapping costs and priors negates the threshold") {
    const PopulationModel m = PopulationModel::equal_variance(-0.7, 1.9, 1.3, 0.35);
    const PopulationModel mirrored = PopulationModel::equal_variance(-1.9, 0.7, 1.3, 0.65);
    const CostSpec costs(4.0, 1.5);
    const CostSpec swapped(1.5, 4.0);
    CHECK(bayes_rule(mirrored, swapped).x_star == -bayes_rule(m, costs).x_star);
}

TEST_CASE("tail regime: cost ratio >= 27 puts the threshold past mu1 + 0.5 sigma") {
    const PopulationModel m = fig1();
    for (double ratio : {27.0, 81.0, 243.0}) CHECK(bayes_rule(m, CostSpec(ratio, 1)).x_star > 1.5);
    CHECK(bayes_rule(m, CostSpec(9, 1)).x_star < 1.5);
}

TEST_CASE("mistaken prior rule") {
    const PopulationModel m = fig1();
    const CostSpec unit(1, 1);
    const DecisionRule same = mistaken_prior_rule(m, 0.5, unit);
    CHECK(same.x_star == bayes_rule(m, unit).x_star);

    const DecisionRule wrong = mistaken_prior_rule(m, 0.9, unit);
    CHECK(wrong.x_star == doctest::Approx(oracle::kHalfLn9).epsilon(1e-14));
    const RiskReport r = bayes_risk(m, unit, wrong);
    CHECK(r.risk == doctest::Approx(0.5 * (oracle::kFprAtHalfLn9 + oracle::kFnrAtHalfLn9)).epsilon(1e-12));
    CHECK(r.regret == doctest::Approx(oracle::kRegretBelieved09Unit).epsilon(1e-11));
    CHECK(std::abs(r.regret - 0.11995) < 1e-5);

    // Same prior error under c01/c10 = 9. The cost-weighted regret is smaller
    // than the unit-cost regret (mpmath oracle); the misclassification rate
    // increase is larger.
    const CostSpec costly(9, 1);
    const DecisionRule wrong9 = mistaken_prior_rule(m, 0.9, costly);
    const RiskReport r9 = bayes_risk(m, costly, wrong9);
    CHECK(r9.regret == doctest::Approx(oracle::kRegretBelieved09Cost9).epsilon(1e-11));
    const auto error = [&](const DecisionRule& d) {
        const ErrorRates e = error_rates_analytic(m, d);
        return 0.5 * e.fpr + 0.5 * e.fnr;
    };
    const double extra_unit = error(wrong) - error(bayes_rule(m, unit));
    const double extra_costly = error(wrong9) - error(bayes_rule(m, costly));
    CHECK(extra_costly > extra_unit);
    CHECK(error_rates_analytic(m, wrong9).fnr > error_rates_analytic(m, bayes_rule(m, costly)).fnr);

    CHECK_THROWS_AS(mistaken_prior_rule(m, 0.0, unit), std::invalid_argument);
    CHECK_THROWS_AS(mistaken_prior_rule(m, 1.0, unit), std::invalid_argument);
}
