#include "humble/scenario.hpp"

#include <algorithm>
#include <stdexcept>

namespace humble {

PopulationModel Scenario::population_model() const {
    return PopulationModel({model.mean0, model.stddev0}, {model.mean1, model.stddev1}, model.prior0, model.prior1);
}

std::optional<GroupedPopulation> Scenario::grouped_population() const {
    if (model.groups.empty()) return std::nullopt;
    std::vector<PopulationGroup> groups;
    for (const auto& g : model.groups)
        groups.push_back({g.id, PopulationModel({g.mean0, g.stddev0}, {g.mean1, g.stddev1}, g.prior0, g.prior1),
                          g.weight});
    return GroupedPopulation(std::move(groups));
}

bool Scenario::wants_format(const std::string& format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

double balanced_threshold(const PopulationModel& model) { return threshold_x(model, 1.0); }

DecisionRule scenario_rule(const Scenario& scenario) {
    const PopulationModel model = scenario.population_model();
    if (scenario.believed_prior0) return mistaken_prior_rule(model, *scenario.believed_prior0, scenario.costs);
    return bayes_rule(model, scenario.costs);
}

ResolvedPolicy resolve_policy(const Scenario& scenario) {
    const PopulationModel model = scenario.population_model();
    ResolvedPolicy out;
    out.kind = scenario.policy.kind;
    out.point = scenario.policy.threshold ? rule_at(model, *scenario.policy.threshold) : scenario_rule(scenario);

    switch (scenario.policy.kind) {
        case PolicyKind::point:
            break;
        case PolicyKind::band: {
            const auto& b = scenario.policy.band;
            const double lower = b.lower ? *b.lower : balanced_threshold(model);
            const double upper = b.upper ? *b.upper : out.point.x_star;
            InBandAction action = b.action == BandAction::randomize ? InBandAction{Randomize{b.p_trust}}
                                                                    : InBandAction{Defer{}};
            out.band = BandPolicy(lower, upper, action);
            out.oracle = OracleModel(b.oracle_accuracy);
            break;
        }
        case PolicyKind::schedule: {
            const auto& s = scenario.policy.schedule;
            const double start = s.start ? *s.start : balanced_threshold(model);
            const double end = s.end ? *s.end : out.point.x_star;
            const std::size_t rounds = s.rounds ? *s.rounds : scenario.feedback.rounds;
            out.schedule = make_schedule(start, end, rounds, s.shape);
            break;
        }
        case PolicyKind::acquisition: {
            const auto& a = scenario.policy.acquisition;
            out.acquisition = AcquisitionPolicy(a.confidence_floor, a.sharpen_factor, a.max_steps, a.step_cost);
            break;
        }
    }
    return out;
}

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::point: return "point";
        case PolicyKind::band: return "band";
        case PolicyKind::schedule: return "schedule";
        case PolicyKind::acquisition: return "acquisition";
    }
    return "?";
}

const char* to_string(BandAction action) { return action == BandAction::randomize ? "randomize" : "defer"; }

const char* to_string(InitialQ init) { return init == InitialQ::beta ? "beta" : "prior"; }

const char* to_string(ScheduleShape shape) {
    return shape == ScheduleShape::linear ? "linear" : "geometric_gap";
}

}  // namespace humble
