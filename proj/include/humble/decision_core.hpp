#pragma once

// Bayes-optimal likelihood-ratio decision rules, their error rates and
// expected cost.
//
// The rule trusts (predicts 1) when p(x|1)/p(x|0) > eta with
//     eta = (c01 * p0) / (c10 * p1),
// so a larger false-positive cost raises the bar for trust. For
// equal-variance Gaussians the log-likelihood ratio is affine and the rule
// reduces to a feature threshold x_star: predict 1 iff x > x_star.

#include "humble/dist_model.hpp"

#include <cstdint>
#include <stdexcept>

namespace humble {

/// Thrown when a model lacks the monotone likelihood ratio a point rule needs.
class UnsupportedModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CostSpec {
    double c01 = 1.0;  ///< false positive: trusting the untrustworthy
    double c10 = 1.0;  ///< false negative: distrusting the trustworthy

    CostSpec() = default;
    CostSpec(double c01, double c10);

    friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

struct DecisionRule {
    double x_star = 0.0;
    double eta = 1.0;

    /// Ties (x == x_star) go to 0.
    Label classify(double x) const { return x > x_star ? 1 : 0; }
};

struct ErrorRates {
    double fpr = 0.0;
    double fnr = 0.0;
    double tpr = 1.0;
    double tnr = 1.0;
    double deferral_rate = 0.0;
    double stderr_fpr = 0.0;
    double stderr_fnr = 0.0;
};

struct RiskReport {
    double risk = 0.0;
    double threshold_used = 0.0;
    double regret = 0.0;
};

double lr_threshold(const CostSpec& costs, double prior0, double prior1);
/// ln(eta) as (ln c01 + ln p0) - (ln c10 + ln p1); swapping the classes negates it exactly.
double log_lr_threshold(const CostSpec& costs, double prior0, double prior1);

/// Feature-space boundary solving LR(x) = eta. Closed form for
/// equal-variance models; throws UnsupportedModel otherwise.
double threshold_x(const PopulationModel& model, double eta);
double threshold_x_from_log(const PopulationModel& model, double log_eta);

/// Same boundary found by bisection on the log-likelihood ratio over
/// [mu0 - 12 sigma, mu1 + 12 sigma] (abs. tolerance 1e-12, <= 200 steps).
/// Throws std::domain_error if the root is outside the bracket.
double threshold_x_bisection(const PopulationModel& model, double eta);

/// log p(x|1) - log p(x|0).
double log_likelihood_ratio(const PopulationModel& model, double x);

/// Bayes rule for the model's own priors.
DecisionRule bayes_rule(const PopulationModel& model, const CostSpec& costs);
/// Point rule at an explicit feature threshold; eta is the LR there.
DecisionRule rule_at(const PopulationModel& model, double x_star);

/// "Reject everyone" / "accept everyone" thresholds: mid-mean +/- 40 sigma.
double reject_all_threshold(const PopulationModel& model);
double accept_all_threshold(const PopulationModel& model);

inline Label classify(const DecisionRule& rule, double x) { return rule.classify(x); }

ErrorRates error_rates_analytic(const PopulationModel& model, const DecisionRule& rule);

/// Empirical rates on n samples with binomial standard errors.
ErrorRates error_rates_mc(const PopulationModel& model, const DecisionRule& rule, std::size_t n,
                          std::uint64_t seed);

/// Expected cost c01*p0*fpr + c10*p1*fnr for rates computed elsewhere.
double expected_cost(const PopulationModel& model, const CostSpec& costs, const ErrorRates& rates);

/// Risk of `rule` under the model's true priors, with regret against the
/// Bayes rule for the same model and costs.
RiskReport bayes_risk(const PopulationModel& model, const CostSpec& costs, const DecisionRule& rule);

/// Threshold computed from believed priors (believed_prior0, 1 - believed_prior0).
DecisionRule mistaken_prior_rule(const PopulationModel& model, double believed_prior0, const CostSpec& costs);

}  // namespace humble
