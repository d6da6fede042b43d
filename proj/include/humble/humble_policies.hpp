#pragma once

// Decision policies that soften a hard distrust threshold:
//  - a band around the threshold inside which the decision is randomized
//    or deferred to a human decision maker,
//  - threshold schedules that start lenient and tighten over rounds,
//  - feature acquisition that keeps observing an individual while the
//    posterior stays too uncertain.

#include "humble/decision_core.hpp"
#include "humble/random.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace humble {

struct Randomize {
    double p_trust = 0.5;
    friend bool operator==(const Randomize&, const Randomize&) = default;
};
struct Defer {
    friend bool operator==(const Defer&, const Defer&) = default;
};
using InBandAction = std::variant<Randomize, Defer>;

/// Band (lower, upper]: x > upper trusts, x <= lower distrusts, the rest
/// gets the in-band action. lower == upper is exactly the point rule at upper.
struct BandPolicy {
    double lower = 0.0;
    double upper = 0.0;
    InBandAction in_band_action = Randomize{};

    BandPolicy() = default;
    BandPolicy(double lower, double upper, InBandAction action);

    bool in_band(double x) const { return x > lower && x <= upper; }
};

/// Human decision maker whose decision matches the truth with probability `accuracy`.
struct OracleModel {
    double accuracy = 1.0;

    OracleModel() = default;
    explicit OracleModel(double accuracy);
};

enum class DecidedBy { machine, random, oracle };
const char* to_string(DecidedBy by);

struct BandDecision {
    Label label = 0;
    DecidedBy by = DecidedBy::machine;
};

/// Throws std::invalid_argument for Defer without an oracle, or when
/// randomness is needed (randomize, or an imperfect oracle) and no seed is given.
BandDecision band_decide(const BandPolicy& policy, double x, Label true_label,
                         const std::optional<OracleModel>& oracle, std::optional<std::uint64_t> seed);
/// Stream variant used inside simulations; draws exactly one uniform.
BandDecision band_decide(const BandPolicy& policy, double x, Label true_label,
                         const std::optional<OracleModel>& oracle, Rng& rng);

/// Closed-form system rates (machine + in-band mechanism). deferral_rate is
/// the prior-weighted in-band mass for Defer and 0 for Randomize.
ErrorRates band_error_rates(const PopulationModel& model, const BandPolicy& policy,
                            const std::optional<OracleModel>& oracle);

enum class ScheduleShape { linear, geometric_gap };

class ThresholdSchedule {
public:
    /// Throws unless the sequence is nonempty and nondecreasing.
    explicit ThresholdSchedule(std::vector<double> thresholds);

    const std::vector<double>& thresholds() const { return thresholds_; }
    std::size_t rounds() const { return thresholds_.size(); }
    /// Rounds past the end hold the final threshold.
    double at(std::size_t round) const;

private:
    std::vector<double> thresholds_;
};

/// Gap to `end` shrinks by this factor each round in the geometric_gap shape.
inline constexpr double kGeometricGapFactor = 0.5;

/// linear: equal steps from start to end. geometric_gap: end - (end-start)*0.5^k
/// for k < rounds-1, then end. rounds == 1 gives {end}.
ThresholdSchedule make_schedule(double start, double end, std::size_t rounds, ScheduleShape shape);

struct AcquisitionPolicy {
    double confidence_floor = 0.9;
    double sharpen_factor_per_step = 0.7;
    std::size_t max_steps = 5;
    double step_cost = 0.0;

    AcquisitionPolicy() = default;
    AcquisitionPolicy(double confidence_floor, double sharpen_factor_per_step, std::size_t max_steps,
                      double step_cost);
};

struct AcquisitionResult {
    double posterior1 = 0.5;
    std::size_t steps_taken = 0;
    Label decision = 0;
    double final_x = 0.0;
    double cost = 0.0;  ///< steps_taken * step_cost
};

/// While max(posterior, 1 - posterior) < confidence_floor and steps remain,
/// sharpen the model by the per-step factor and redraw the individual's
/// observation from the sharpened conditional of their true label. Decides
/// 1 iff the final posterior >= 0.5.
AcquisitionResult acquire_features(const PopulationModel& model, double x, Label true_label,
                                   const AcquisitionPolicy& policy, std::uint64_t seed);

}  // namespace humble
