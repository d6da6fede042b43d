#include "humble/humble_policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace humble {

BandPolicy::BandPolicy(double lower_, double upper_, InBandAction action)
    : lower(lower_), upper(upper_), in_band_action(action) {
    if (!std::isfinite(lower) || !std::isfinite(upper)) throw std::invalid_argument("band edges must be finite");
    if (lower > upper) throw std::invalid_argument("band lower must not exceed upper");
    if (const auto* r = std::get_if<Randomize>(&in_band_action)) {
        if (!(r->p_trust >= 0.0 && r->p_trust <= 1.0)) throw std::invalid_argument("p_trust must lie in [0,1]");
    }
}

OracleModel::OracleModel(double accuracy_) : accuracy(accuracy_) {
    if (!(accuracy >= 0.5 && accuracy <= 1.0)) throw std::invalid_argument("oracle accuracy must lie in [0.5,1]");
}

const char* to_string(DecidedBy by) {
    switch (by) {
        case DecidedBy::machine: return "machine";
        case DecidedBy::random: return "random";
        case DecidedBy::oracle: return "oracle";
    }
    return "?";
}

namespace {

// `u` is a uniform draw on [0,1); ignored outside the band.
BandDecision decide_with_uniform(const BandPolicy& policy, double x, Label true_label,
                                 const std::optional<OracleModel>& oracle, double u) {
    if (x > policy.upper) return {1, DecidedBy::machine};
    if (!policy.in_band(x)) return {0, DecidedBy::machine};
    if (const auto* r = std::get_if<Randomize>(&policy.in_band_action)) {
        return {u < r->p_trust ? 1 : 0, DecidedBy::random};
    }
    const bool correct = u < oracle->accuracy;
    return {correct ? true_label : 1 - true_label, DecidedBy::oracle};
}

void check_band_inputs(const BandPolicy& policy, Label true_label, const std::optional<OracleModel>& oracle) {
    if (true_label != 0 && true_label != 1) throw std::invalid_argument("label must be 0 or 1");
    if (std::holds_alternative<Defer>(policy.in_band_action) && !oracle)
        throw std::invalid_argument("defer action requires an oracle");
}

}  // namespace

BandDecision band_decide(const BandPolicy& policy, double x, Label true_label,
                         const std::optional<OracleModel>& oracle, std::optional<std::uint64_t> seed) {
    check_band_inputs(policy, true_label, oracle);
    const bool needs_randomness = std::holds_alternative<Randomize>(policy.in_band_action) ||
                                  (oracle && oracle->accuracy < 1.0);
    if (needs_randomness && !seed) throw std::invalid_argument("band decision needs a seed");
    const double u = seed ? Rng(*seed).uniform() : 0.0;
    return decide_with_uniform(policy, x, true_label, oracle, u);
}

BandDecision band_decide(const BandPolicy& policy, double x, Label true_label,
                         const std::optional<OracleModel>& oracle, Rng& rng) {
    check_band_inputs(policy, true_label, oracle);
    return decide_with_uniform(policy, x, true_label, oracle, rng.uniform());
}

ErrorRates band_error_rates(const PopulationModel& model, const BandPolicy& policy,
                            const std::optional<OracleModel>& oracle) {
    if (std::holds_alternative<Defer>(policy.in_band_action) && !oracle)
        throw std::invalid_argument("defer action requires an oracle");
    const auto& c0 = model.cond0();
    const auto& c1 = model.cond1();
    const double above0 = c0.survival(policy.upper);
    const double below1 = c1.cdf(policy.lower);
    // P(l < X <= u | y) as a difference on the side with less cancellation.
    auto band_mass = [&](const GaussianConditional& c) {
        return std::max(0.0, c.cdf(policy.upper) - c.cdf(policy.lower));
    };
    const double band0 = policy.lower == policy.upper ? 0.0 : band_mass(c0);
    const double band1 = policy.lower == policy.upper ? 0.0 : band_mass(c1);

    ErrorRates r;
    if (const auto* rnd = std::get_if<Randomize>(&policy.in_band_action)) {
        r.fpr = above0 + rnd->p_trust * band0;
        r.fnr = below1 + (1.0 - rnd->p_trust) * band1;
        r.deferral_rate = 0.0;
    } else {
        const double miss = 1.0 - oracle->accuracy;
        r.fpr = above0 + miss * band0;
        r.fnr = below1 + miss * band1;
        r.deferral_rate = model.prior0() * band0 + model.prior1() * band1;
    }
    r.tnr = 1.0 - r.fpr;
    r.tpr = 1.0 - r.fnr;
    return r;
}

ThresholdSchedule::ThresholdSchedule(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw std::invalid_argument("schedule needs at least one threshold");
    for (double t : thresholds_)
        if (!std::isfinite(t)) throw std::invalid_argument("schedule thresholds must be finite");
    if (!std::is_sorted(thresholds_.begin(), thresholds_.end()))
        throw std::invalid_argument("schedule thresholds must be nondecreasing");
}

double ThresholdSchedule::at(std::size_t round) const {
    return thresholds_[std::min(round, thresholds_.size() - 1)];
}

ThresholdSchedule make_schedule(double start, double end, std::size_t rounds, ScheduleShape shape) {
    if (rounds == 0) throw std::invalid_argument("schedule needs at least one round");
    if (start > end) throw std::invalid_argument("schedule start must not exceed end");
    std::vector<double> t(rounds);
    const double span = end - start;
    const std::size_t last = rounds - 1;
    for (std::size_t k = 0; k < last; ++k) {
        switch (shape) {
            case ScheduleShape::linear:
                t[k] = start + span * (static_cast<double>(k) / static_cast<double>(last));
                break;
            case ScheduleShape::geometric_gap:
                t[k] = end - span * std::pow(kGeometricGapFactor, static_cast<double>(k));
                break;
        }
        t[k] = std::clamp(t[k], start, end);
    }
    t[last] = end;
    return ThresholdSchedule(std::move(t));
}

AcquisitionPolicy::AcquisitionPolicy(double floor, double factor, std::size_t steps, double cost)
    : confidence_floor(floor), sharpen_factor_per_step(factor), max_steps(steps), step_cost(cost) {
    if (!(floor > 0.5 && floor < 1.0)) throw std::invalid_argument("confidence_floor must lie in (0.5,1)");
    if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("sharpen_factor_per_step must lie in (0,1)");
    if (!(cost >= 0.0) || !std::isfinite(cost)) throw std::invalid_argument("step_cost must be >= 0");
}

AcquisitionResult acquire_features(const PopulationModel& model, double x, Label true_label,
                                   const AcquisitionPolicy& policy, std::uint64_t seed) {
    if (true_label != 0 && true_label != 1) throw std::invalid_argument("label must be 0 or 1");
    Rng rng(seed);
    PopulationModel current = model;
    AcquisitionResult out;
    out.final_x = x;
    out.posterior1 = current.posterior1(x);
    auto confident = [&] { return std::max(out.posterior1, 1.0 - out.posterior1) >= policy.confidence_floor; };
    while (!confident() && out.steps_taken < policy.max_steps) {
        current = sharpen(current, policy.sharpen_factor_per_step);
        const auto& c = current.conditional(true_label);
        out.final_x = rng.normal(c.mean, c.stddev);
        out.posterior1 = current.posterior1(out.final_x);
        ++out.steps_taken;
    }
    out.decision = out.posterior1 >= 0.5 ? 1 : 0;
    out.cost = static_cast<double>(out.steps_taken) * policy.step_cost;
    return out;
}

}  // namespace humble
