#include "humble/feedback_sim.hpp"

#include "humble/random.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

namespace humble {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kCohortStream = 1;
constexpr std::uint64_t kRoundStream = 2;

void fail(const std::string& field, const std::string& what) {
    throw std::invalid_argument(field + ": " + what);
}

void validate(const Scenario& s) {
    if (s.feedback.rounds < 1) fail("feedback.rounds", "must be at least 1");
    if (s.feedback.cohort_size < 1) fail("feedback.cohort_size", "must be at least 1");
    if (!(s.feedback.delta_up >= 0.0)) fail("feedback.delta_up", "must be >= 0");
    if (!(s.feedback.delta_down >= 0.0)) fail("feedback.delta_down", "must be >= 0");
    if (!std::isfinite(s.feedback.chain_weight)) fail("feedback.chain_weight", "must be finite");
    if (s.feedback.initial_q == InitialQ::beta && !(s.feedback.q_alpha > 0.0 && s.feedback.q_beta > 0.0))
        fail("feedback.q_alpha", "beta parameters must be positive");
    if (s.feedback.recalibrate && s.policy.kind != PolicyKind::point)
        fail("feedback.recalibrate", "only supported with the point policy");
}

}  // namespace

ResponsivenessRule::ResponsivenessRule(double up, double down) : delta_up(up), delta_down(down) {
    if (!(up >= 0.0) || !(down >= 0.0)) throw std::invalid_argument("responsiveness deltas must be >= 0");
}

ChainConfig::ChainConfig(double w) : carryover_weight(w) {
    if (!std::isfinite(w)) throw std::invalid_argument("carryover weight must be finite");
}

Individual apply_responsiveness(Individual ind, Label decision, const ResponsivenessRule& rule) {
    if (decision == 1)
        ind.latent_q = std::min(1.0, ind.latent_q + rule.delta_up);
    else
        ind.latent_q = std::max(0.0, ind.latent_q - rule.delta_down);
    return ind;
}

EstimatorState reestimate(std::span<const AcceptedOutcome> accepted) {
    EstimatorState st;
    double sum = 0.0;
    for (const auto& a : accepted) {
        if (a.outcome != 1) continue;
        sum += a.x;
        ++st.n_observed;
    }
    if (st.n_observed > 0) st.est_mean1 = sum / static_cast<double>(st.n_observed);
    return st;
}

EstimatorState merge(const EstimatorState& a, const EstimatorState& b) {
    if (!a.has_update()) return b;
    if (!b.has_update()) return a;
    EstimatorState out;
    out.n_observed = a.n_observed + b.n_observed;
    out.est_mean1 = (a.est_mean1 * static_cast<double>(a.n_observed) +
                     b.est_mean1 * static_cast<double>(b.n_observed)) /
                    static_cast<double>(out.n_observed);
    return out;
}

std::vector<ChainedDecision> chain_deciders(const ChainConfig& chain, const DecisionRule& rule_a,
                                            const DecisionRule& rule_b, std::span<const Sample> samples,
                                            std::span<const double> b_observations) {
    if (!b_observations.empty() && b_observations.size() != samples.size())
        throw std::invalid_argument("decider B observations must match the sample count");
    std::vector<ChainedDecision> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Label a = rule_a.classify(samples[i].x);
        const double xb = b_observations.empty() ? samples[i].x : b_observations[i];
        const double shifted = xb + chain.carryover_weight * (2.0 * a - 1.0);
        out.push_back({a, rule_b.classify(shifted)});
    }
    return out;
}

ChainGap chain_gap_empirical(std::span<const Sample> samples, std::span<const ChainedDecision> decisions) {
    if (samples.size() != decisions.size()) throw std::invalid_argument("samples and decisions differ in length");
    std::size_t pos = 0, b_fn = 0, a_fn = 0, both_fn = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].true_label != 1) continue;
        ++pos;
        const bool fa = decisions[i].dec_a == 0;
        const bool fb = decisions[i].dec_b == 0;
        b_fn += fb;
        a_fn += fa;
        both_fn += fa && fb;
    }
    ChainGap g;
    if (pos == 0 || a_fn == 0) return g;
    g.p_b_fn = static_cast<double>(b_fn) / static_cast<double>(pos);
    g.p_b_fn_given_a_fn = static_cast<double>(both_fn) / static_cast<double>(a_fn);
    g.gap = g.p_b_fn_given_a_fn - g.p_b_fn;
    // Sum of the two binomial variances; the estimates are positively
    // correlated, so this overstates the variance of the difference.
    g.stderr_gap = std::sqrt(g.p_b_fn_given_a_fn * (1.0 - g.p_b_fn_given_a_fn) / static_cast<double>(a_fn) +
                             g.p_b_fn * (1.0 - g.p_b_fn) / static_cast<double>(pos));
    return g;
}

ChainGap chain_gap_analytic(const PopulationModel& model, const ChainConfig& chain, const DecisionRule& rule_a,
                            const DecisionRule& rule_b) {
    const auto& c1 = model.cond1();
    const double w = chain.carryover_weight;
    const double a_fn = c1.cdf(rule_a.x_star);
    const double b_fn_after_distrust = c1.cdf(rule_b.x_star + w);
    const double b_fn_after_trust = c1.cdf(rule_b.x_star - w);
    ChainGap g;
    g.p_b_fn_given_a_fn = b_fn_after_distrust;
    g.p_b_fn = a_fn * b_fn_after_distrust + (1.0 - a_fn) * b_fn_after_trust;
    g.gap = (1.0 - a_fn) * (b_fn_after_distrust - b_fn_after_trust);
    return g;
}

std::size_t SimulationResult::cumulative_false_negatives() const {
    std::size_t total = 0;
    for (const auto& s : summaries) total += s.false_negatives;
    return total;
}

double SimulationResult::mean_final_q() const {
    if (cohort.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& ind : cohort) sum += ind.latent_q;
    return sum / static_cast<double>(cohort.size());
}

SimulationResult run_simulation(const Scenario& scenario, SimulationOptions options) {
    validate(scenario);
    const PopulationModel model = scenario.population_model();
    const auto grouped = scenario.grouped_population();
    const ResolvedPolicy policy = resolve_policy(scenario);
    const auto& fb = scenario.feedback;
    const ResponsivenessRule responsiveness(fb.delta_up, fb.delta_down);
    const bool chained = fb.chain_weight != 0.0;
    const ChainConfig chain(fb.chain_weight);
    // Decider B keeps its own Bayes threshold on the unchained model.
    const DecisionRule rule_b = chained ? bayes_rule(model, scenario.costs) : DecisionRule{};

    // Per-individual generative model (group-specific when groups are configured).
    std::vector<const PopulationModel*> models(fb.cohort_size, &model);
    SimulationResult result;
    result.cohort.resize(fb.cohort_size);
    for (std::size_t i = 0; i < fb.cohort_size; ++i) {
        Rng rng(derive_seed(scenario.seed, {kCohortStream, i}));
        Individual& ind = result.cohort[i];
        ind.individual_id = i;
        const double u_group = rng.uniform();
        if (grouped) {
            const auto& groups = grouped->groups();
            std::size_t gi = 0;
            double acc = groups[0].weight;
            while (u_group >= acc && gi + 1 < groups.size()) acc += groups[++gi].weight;
            ind.group_id = groups[gi].group_id;
            models[i] = &groups[gi].model;
        }
        if (fb.initial_q == InitialQ::beta)
            ind.latent_q = rng.beta(fb.q_alpha, fb.q_beta);
        else
            ind.latent_q = rng.uniform() < models[i]->prior1() ? 1.0 : 0.0;
    }

    double point_threshold = policy.point.x_star;
    double acquisition_threshold = std::nan("");
    if (policy.kind == PolicyKind::acquisition && model.equal_variance() && model.cond0().mean < model.cond1().mean)
        acquisition_threshold = threshold_x(model, model.prior0() / model.prior1());

    for (std::size_t t = 0; t < fb.rounds; ++t) {
        RoundLog log;
        log.round = t;
        switch (policy.kind) {
            case PolicyKind::point: log.threshold = point_threshold; break;
            case PolicyKind::schedule: log.threshold = policy.schedule->at(t); break;
            case PolicyKind::band: log.threshold = policy.band->upper; break;
            case PolicyKind::acquisition: log.threshold = acquisition_threshold; break;
        }
        if (options.keep_decisions) log.decisions.reserve(fb.cohort_size);

        RoundSummary sum;
        sum.round = t;
        sum.threshold = log.threshold;
        sum.cohort = fb.cohort_size;
        double accepted_sum = 0.0;
        std::size_t accepted_n = 0;
        double q_total = 0.0;

        for (std::size_t i = 0; i < fb.cohort_size; ++i) {
            Individual& ind = result.cohort[i];
            Rng rng(derive_seed(scenario.seed, {kRoundStream, t, i}));
            // Fixed draw order so paired runs share random numbers.
            const Label y = rng.uniform() < ind.latent_q ? 1 : 0;
            const double z_a = rng.normal();
            const double z_b = rng.normal();
            const std::uint64_t acquisition_seed = rng.next_u64();
            const auto& cond = models[i]->conditional(y);
            const double x = cond.mean + cond.stddev * z_a;
            ind.x_base = x;

            DecisionRecord rec;
            rec.individual_id = ind.individual_id;
            rec.x = x;
            rec.true_label = y;
            switch (policy.kind) {
                case PolicyKind::point:
                case PolicyKind::schedule:
                    rec.decision = x > log.threshold ? 1 : 0;
                    break;
                case PolicyKind::band: {
                    const auto d = band_decide(*policy.band, x, y, policy.oracle, rng);
                    rec.decision = d.label;
                    rec.decided_by = d.by;
                    break;
                }
                case PolicyKind::acquisition:
                    rec.decision = acquire_features(model, x, y, *policy.acquisition, acquisition_seed).decision;
                    break;
            }
            if (rec.decision == 1) {
                rec.observed_outcome = y;
                ++sum.observed;
                if (y == 1) {
                    accepted_sum += x;
                    ++accepted_n;
                }
            }
            sum.positives += y;
            sum.trusted += rec.decision;
            sum.false_positives += rec.decision == 1 && y == 0;
            sum.false_negatives += rec.decision == 0 && y == 1;
            sum.deferred += rec.decided_by == DecidedBy::oracle;

            ind = apply_responsiveness(ind, rec.decision, responsiveness);
            if (chained) {
                const double xb = cond.mean + cond.stddev * z_b + chain.carryover_weight * (2.0 * rec.decision - 1.0);
                rec.decision_b = rule_b.classify(xb);
                sum.chained_false_negatives += *rec.decision_b == 0 && y == 1;
                ind = apply_responsiveness(ind, *rec.decision_b, responsiveness);
            }
            q_total += ind.latent_q;
            if (options.keep_decisions) log.decisions.push_back(rec);
        }

        EstimatorState round_estimate;
        if (accepted_n > 0) round_estimate = {accepted_sum / static_cast<double>(accepted_n), accepted_n};
        result.estimate = merge(result.estimate, round_estimate);
        sum.mean_q = q_total / static_cast<double>(fb.cohort_size);
        sum.est_mean1 = result.estimate.est_mean1;
        sum.n_observed = result.estimate.n_observed;

        if (fb.recalibrate && result.estimate.has_update() && result.estimate.est_mean1 > model.cond0().mean) {
            const PopulationModel believed({model.cond0().mean, model.cond0().stddev},
                                           {result.estimate.est_mean1, model.cond1().stddev}, model.prior0(),
                                           model.prior1());
            point_threshold = threshold_x(believed, policy.point.eta);
        }

        result.summaries.push_back(sum);
        result.rounds.push_back(std::move(log));
    }
    return result;
}

std::vector<SimulationResult> run_replications(const Scenario& scenario, std::size_t count,
                                               SimulationOptions options, unsigned workers) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SimulationResult> results(count);
    auto run_range = [&](std::size_t begin, std::size_t step) {
        for (std::size_t r = begin; r < count; r += step) {
            Scenario rep = scenario;
            rep.seed = derive_seed(scenario.seed, {r});
            results[r] = run_simulation(rep, options);
        }
    };
    std::vector<std::future<void>> jobs;
    const std::size_t n_workers = std::min<std::size_t>(workers, std::max<std::size_t>(count, 1));
    for (std::size_t w = 0; w < n_workers; ++w) jobs.push_back(std::async(std::launch::async, run_range, w, n_workers));
    for (auto& j : jobs) j.get();
    return results;
}

}  // namespace humble
