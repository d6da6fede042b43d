#pragma once

// Multi-round simulation of distrust dynamics.
//
// Each individual carries a propensity q to behave trustworthily. Every
// round they behave trustworthily (label 1) with probability q and emit a
// feature drawn from the model conditional of that label, so the feature
// mean is mu0 + q (mu1 - mu0). The decider observes the behaviour only for
// the people it trusts (selective labels), re-estimates the trustworthy
// class location from those, and q responds to being trusted or distrusted.
// An optional second decider sees its own observation shifted by the first
// decider's output (proxy chaining).

#include "humble/decision_core.hpp"
#include "humble/humble_policies.hpp"
#include "humble/scenario.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace humble {

struct Individual {
    std::uint64_t individual_id = 0;
    std::string group_id;
    double latent_q = 0.5;
    double x_base = 0.0;
};

struct ResponsivenessRule {
    double delta_up = 0.0;
    double delta_down = 0.0;

    ResponsivenessRule() = default;
    ResponsivenessRule(double delta_up, double delta_down);
};

struct DecisionRecord {
    std::uint64_t individual_id = 0;
    double x = 0.0;
    Label true_label = 0;
    Label decision = 0;
    DecidedBy decided_by = DecidedBy::machine;
    std::optional<Label> observed_outcome;  ///< present iff decision == 1
    std::optional<Label> decision_b;        ///< chained decider, when enabled
};

struct RoundLog {
    std::size_t round = 0;
    double threshold = 0.0;
    std::vector<DecisionRecord> decisions;
};

struct RoundSummary {
    std::size_t round = 0;
    double threshold = 0.0;
    std::size_t cohort = 0;
    std::size_t positives = 0;  ///< individuals behaving trustworthily this round
    std::size_t trusted = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t deferred = 0;
    std::size_t observed = 0;
    std::size_t chained_false_negatives = 0;
    double mean_q = 0.0;  ///< after this round's responsiveness update
    double est_mean1 = 0.0;
    std::size_t n_observed = 0;  ///< cumulative estimator count
};

struct EstimatorState {
    double est_mean1 = 0.0;
    std::size_t n_observed = 0;

    bool has_update() const { return n_observed > 0; }
};

struct AcceptedOutcome {
    double x = 0.0;
    Label outcome = 0;
};

struct ChainConfig {
    double carryover_weight = 0.0;

    ChainConfig() = default;
    explicit ChainConfig(double carryover_weight);
};

struct ChainedDecision {
    Label dec_a = 0;
    Label dec_b = 0;
};

struct SimulationOptions {
    bool keep_decisions = true;
};

struct SimulationResult {
    std::vector<RoundLog> rounds;  ///< empty decisions when keep_decisions is false
    std::vector<RoundSummary> summaries;
    EstimatorState estimate;
    std::vector<Individual> cohort;  ///< final state

    std::size_t cumulative_false_negatives() const;
    double mean_final_q() const;
};

/// Throws std::invalid_argument with the offending field on invalid scenarios.
SimulationResult run_simulation(const Scenario& scenario, SimulationOptions options = {});

/// `count` independent replications; replication r runs with seed
/// derive_seed(scenario.seed, {r}). Results are ordered by r and do not
/// depend on the number of worker threads.
std::vector<SimulationResult> run_replications(const Scenario& scenario, std::size_t count,
                                               SimulationOptions options = {.keep_decisions = false},
                                               unsigned workers = 0);

/// Mean feature over accepted individuals whose outcome is 1.
EstimatorState reestimate(std::span<const AcceptedOutcome> accepted);
/// Pooled estimate of two disjoint observation sets.
EstimatorState merge(const EstimatorState& a, const EstimatorState& b);

/// decA = classify(A, x); decB = classify(B, xb + w (2 decA - 1)), where xb is
/// decider B's own observation (`b_observations[i]`) or, when that span is
/// empty, the shared x.
std::vector<ChainedDecision> chain_deciders(const ChainConfig& chain, const DecisionRule& rule_a,
                                            const DecisionRule& rule_b, std::span<const Sample> samples,
                                            std::span<const double> b_observations = {});

struct ChainGap {
    double p_b_fn_given_a_fn = 0.0;  ///< P(decB = 0 | Y = 1, decA = 0)
    double p_b_fn = 0.0;             ///< P(decB = 0 | Y = 1)
    double gap = 0.0;
    double stderr_gap = 0.0;
};

/// Empirical error-inflation gap from chained decisions on labelled samples.
ChainGap chain_gap_empirical(std::span<const Sample> samples, std::span<const ChainedDecision> decisions);

/// Exact gap when decider B observes an independent draw from the model
/// conditional of the same label. Zero exactly at carryover weight 0.
ChainGap chain_gap_analytic(const PopulationModel& model, const ChainConfig& chain, const DecisionRule& rule_a,
                            const DecisionRule& rule_b);

/// Trusted: q + delta_up, distrusted: q - delta_down, clipped to [0,1].
/// x_base is untouched; the simulation redraws it at the start of the next round.
Individual apply_responsiveness(Individual ind, Label decision, const ResponsivenessRule& rule);

}  // namespace humble
