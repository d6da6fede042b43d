#pragma once

// Declarative experiment description. Every field carries a default so a
// minimal document (model + costs) is a complete scenario; the defaults
// reproduce the symmetric equal-cost setup {N(-1,1), N(1,1)}, p0 = p1 = 0.5.

#include "humble/decision_core.hpp"
#include "humble/dist_model.hpp"
#include "humble/humble_policies.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace humble {

struct GroupSpec {
    std::string id;
    double weight = 1.0;
    double mean0 = -1.0;
    double mean1 = 1.0;
    double stddev0 = 1.0;
    double stddev1 = 1.0;
    double prior0 = 0.5;
    double prior1 = 0.5;

    friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

struct ModelSpec {
    double mean0 = -1.0;
    double mean1 = 1.0;
    double stddev0 = 1.0;
    double stddev1 = 1.0;
    double prior0 = 0.5;
    double prior1 = 0.5;
    std::vector<GroupSpec> groups;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

enum class PolicyKind { point, band, schedule, acquisition };
enum class BandAction { randomize, defer };
enum class InitialQ { beta, prior };

struct BandSpec {
    std::optional<double> lower;  ///< default: balanced (eta = 1) threshold
    std::optional<double> upper;  ///< default: Bayes threshold for the scenario costs
    BandAction action = BandAction::randomize;
    double p_trust = 0.5;
    double oracle_accuracy = 1.0;

    friend bool operator==(const BandSpec&, const BandSpec&) = default;
};

struct ScheduleSpec {
    std::optional<double> start;         ///< default: balanced threshold
    std::optional<double> end;           ///< default: Bayes threshold
    std::optional<std::size_t> rounds;   ///< default: feedback.rounds
    ScheduleShape shape = ScheduleShape::linear;

    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct AcquisitionSpec {
    double confidence_floor = 0.9;
    double sharpen_factor = 0.7;
    std::size_t max_steps = 5;
    double step_cost = 0.0;

    friend bool operator==(const AcquisitionSpec&, const AcquisitionSpec&) = default;
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::point;
    std::optional<double> threshold;  ///< point rule override; default Bayes (or believed-prior) rule
    BandSpec band;
    ScheduleSpec schedule;
    AcquisitionSpec acquisition;

    friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

struct FeedbackSpec {
    std::size_t rounds = 1;
    std::size_t cohort_size = 1000;
    double delta_up = 0.0;
    double delta_down = 0.0;
    double chain_weight = 0.0;
    InitialQ initial_q = InitialQ::beta;
    double q_alpha = 5.0;
    double q_beta = 2.0;
    bool recalibrate = false;  ///< point policy only: re-derive the threshold from the running estimate

    friend bool operator==(const FeedbackSpec&, const FeedbackSpec&) = default;
};

struct OutputSpec {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
    std::vector<int> figures;

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
    ModelSpec model;
    CostSpec costs;
    std::optional<double> believed_prior0;
    PolicySpec policy;
    FeedbackSpec feedback;
    std::uint64_t seed = 20220801;
    std::size_t mc_samples = 100000;
    OutputSpec output;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    PopulationModel population_model() const;
    std::optional<GroupedPopulation> grouped_population() const;
    bool wants_format(const std::string& format) const;
};

/// Point-rule thresholds implied by a scenario.
double balanced_threshold(const PopulationModel& model);
/// Bayes rule for the scenario costs, using believed priors when set.
DecisionRule scenario_rule(const Scenario& scenario);

/// Concrete policy objects with every optional default resolved.
struct ResolvedPolicy {
    PolicyKind kind = PolicyKind::point;
    DecisionRule point;
    std::optional<BandPolicy> band;
    std::optional<OracleModel> oracle;
    std::optional<ThresholdSchedule> schedule;
    std::optional<AcquisitionPolicy> acquisition;
};

ResolvedPolicy resolve_policy(const Scenario& scenario);

const char* to_string(PolicyKind kind);
const char* to_string(BandAction action);
const char* to_string(InitialQ init);
const char* to_string(ScheduleShape shape);

}  // namespace humble
