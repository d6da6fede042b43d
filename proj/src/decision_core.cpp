#include "humble/decision_core.hpp"

#include <algorithm>
#include <cmath>

namespace humble {

CostSpec::CostSpec(double c01_, double c10_) : c01(c01_), c10(c10_) {
    if (!(c01 > 0.0) || !std::isfinite(c01)) throw std::invalid_argument("c01 must be positive and finite");
    if (!(c10 > 0.0) || !std::isfinite(c10)) throw std::invalid_argument("c10 must be positive and finite");
}

double lr_threshold(const CostSpec& costs, double prior0, double prior1) {
    if (!(costs.c01 > 0.0) || !(costs.c10 > 0.0) || !std::isfinite(costs.c01) || !std::isfinite(costs.c10))
        throw std::invalid_argument("costs must be positive and finite");
    if (!(prior0 > 0.0 && prior0 < 1.0) || !(prior1 > 0.0 && prior1 < 1.0))
        throw std::invalid_argument("priors must lie strictly inside (0,1)");
    return (costs.c01 * prior0) / (costs.c10 * prior1);
}

double log_lr_threshold(const CostSpec& costs, double prior0, double prior1) {
    lr_threshold(costs, prior0, prior1);  // validation
    return (std::log(costs.c01) + std::log(prior0)) - (std::log(costs.c10) + std::log(prior1));
}

namespace {

void require_monotone_lr(const PopulationModel& model) {
    if (!model.equal_variance())
        throw UnsupportedModel("point rules need a monotone likelihood ratio (equal class stddevs)");
    if (!(model.cond0().mean < model.cond1().mean))
        throw UnsupportedModel("point rules need cond0.mean < cond1.mean");
}

void require_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive and finite");
}

double max_stddev(const PopulationModel& model) {
    return std::max(model.cond0().stddev, model.cond1().stddev);
}

}  // namespace

double log_likelihood_ratio(const PopulationModel& model, double x) {
    return model.cond1().log_pdf(x) - model.cond0().log_pdf(x);
}

double threshold_x(const PopulationModel& model, double eta) {
    require_eta(eta);
    return threshold_x_from_log(model, std::log(eta));
}

double threshold_x_from_log(const PopulationModel& model, double log_eta) {
    require_monotone_lr(model);
    if (!std::isfinite(log_eta)) throw std::invalid_argument("log eta must be finite");
    const double mu0 = model.cond0().mean;
    const double mu1 = model.cond1().mean;
    const double var = model.cond0().stddev * model.cond0().stddev;
    return 0.5 * (mu0 + mu1) + var * log_eta / (mu1 - mu0);
}

double threshold_x_bisection(const PopulationModel& model, double eta) {
    require_monotone_lr(model);
    require_eta(eta);
    const double sigma = model.cond0().stddev;
    const double target = std::log(eta);
    double lo = model.cond0().mean - 12.0 * sigma;
    double hi = model.cond1().mean + 12.0 * sigma;
    auto f = [&](double x) { return log_likelihood_ratio(model, x) - target; };
    double flo = f(lo);
    if (flo > 0.0 || f(hi) < 0.0) throw std::domain_error("likelihood-ratio root outside bisection bracket");
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

DecisionRule bayes_rule(const PopulationModel& model, const CostSpec& costs) {
    const double log_eta = log_lr_threshold(costs, model.prior0(), model.prior1());
    return DecisionRule{threshold_x_from_log(model, log_eta), lr_threshold(costs, model.prior0(), model.prior1())};
}

DecisionRule rule_at(const PopulationModel& model, double x_star) {
    return DecisionRule{x_star, std::exp(log_likelihood_ratio(model, x_star))};
}

double reject_all_threshold(const PopulationModel& model) {
    return 0.5 * (model.cond0().mean + model.cond1().mean) + 40.0 * max_stddev(model);
}

double accept_all_threshold(const PopulationModel& model) {
    return 0.5 * (model.cond0().mean + model.cond1().mean) - 40.0 * max_stddev(model);
}

ErrorRates error_rates_analytic(const PopulationModel& model, const DecisionRule& rule) {
    ErrorRates r;
    r.fpr = model.cond0().survival(rule.x_star);
    r.tnr = model.cond0().cdf(rule.x_star);
    r.fnr = model.cond1().cdf(rule.x_star);
    r.tpr = model.cond1().survival(rule.x_star);
    return r;
}

ErrorRates error_rates_mc(const PopulationModel& model, const DecisionRule& rule, std::size_t n,
                          std::uint64_t seed) {
    const auto samples = sample_population(model, n, seed);
    std::size_t neg = 0, pos = 0, fp = 0, fn = 0;
    for (const auto& s : samples) {
        const Label d = rule.classify(s.x);
        if (s.true_label == 0) {
            ++neg;
            fp += d == 1;
        } else {
            ++pos;
            fn += d == 0;
        }
    }
    ErrorRates r;
    r.fpr = neg ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
    r.fnr = pos ? static_cast<double>(fn) / static_cast<double>(pos) : 0.0;
    r.tnr = 1.0 - r.fpr;
    r.tpr = 1.0 - r.fnr;
    r.stderr_fpr = neg ? std::sqrt(r.fpr * (1.0 - r.fpr) / static_cast<double>(neg)) : 0.0;
    r.stderr_fnr = pos ? std::sqrt(r.fnr * (1.0 - r.fnr) / static_cast<double>(pos)) : 0.0;
    return r;
}

double expected_cost(const PopulationModel& model, const CostSpec& costs, const ErrorRates& rates) {
    return costs.c01 * model.prior0() * rates.fpr + costs.c10 * model.prior1() * rates.fnr;
}

RiskReport bayes_risk(const PopulationModel& model, const CostSpec& costs, const DecisionRule& rule) {
    const DecisionRule optimal = bayes_rule(model, costs);
    RiskReport report;
    report.risk = expected_cost(model, costs, error_rates_analytic(model, rule));
    report.threshold_used = rule.x_star;
    if (rule.x_star == optimal.x_star) {
        report.regret = 0.0;
    } else {
        const double best = expected_cost(model, costs, error_rates_analytic(model, optimal));
        report.regret = std::max(0.0, report.risk - best);
    }
    return report;
}

DecisionRule mistaken_prior_rule(const PopulationModel& model, double believed_prior0, const CostSpec& costs) {
    if (!(believed_prior0 > 0.0 && believed_prior0 < 1.0))
        throw std::invalid_argument("believed prior0 must lie strictly inside (0,1)");
    if (believed_prior0 == model.prior0()) return bayes_rule(model, costs);
    const double log_eta = log_lr_threshold(costs, believed_prior0, 1.0 - believed_prior0);
    return DecisionRule{threshold_x_from_log(model, log_eta), lr_threshold(costs, believed_prior0, 1.0 - believed_prior0)};
}

}  // namespace humble
