#include "humble/cli.hpp"

#include "humble/config.hpp"
#include "humble/metrics_report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <optional>
#include <ostream>

namespace humble {

using nlohmann::json;

namespace {

json rule_json(const DecisionRule& r) { return {{"threshold", r.x_star}, {"eta", r.eta}}; }

json risk_json(const RiskReport& r) {
    return {{"risk", r.risk}, {"threshold_used", r.threshold_used}, {"regret", r.regret}};
}

// Acquisition has no closed form; rates come from simulating it on a sample.
json acquisition_summary(const PopulationModel& model, const AcquisitionPolicy& policy, const Scenario& s) {
    const auto samples = sample_population(model, s.mc_samples, derive_seed(s.seed, {0xAC}));
    std::size_t neg = 0, pos = 0, fp = 0, fn = 0, steps = 0;
    double cost = 0.0;
    for (const auto& smp : samples) {
        const auto r = acquire_features(model, smp.x, smp.true_label, policy,
                                        derive_seed(s.seed, {0xAC, smp.individual_id}));
        steps += r.steps_taken;
        cost += r.cost;
        if (smp.true_label == 0) {
            ++neg;
            fp += r.decision == 1;
        } else {
            ++pos;
            fn += r.decision == 0;
        }
    }
    ErrorRates rates;
    rates.fpr = neg ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
    rates.fnr = pos ? static_cast<double>(fn) / static_cast<double>(pos) : 0.0;
    rates.tnr = 1.0 - rates.fpr;
    rates.tpr = 1.0 - rates.fnr;
    rates.stderr_fpr = neg ? std::sqrt(rates.fpr * (1.0 - rates.fpr) / static_cast<double>(neg)) : 0.0;
    rates.stderr_fnr = pos ? std::sqrt(rates.fnr * (1.0 - rates.fnr) / static_cast<double>(pos)) : 0.0;
    const double n = static_cast<double>(samples.size());
    return {{"rates", to_json(rates)},
            {"mean_steps", static_cast<double>(steps) / n},
            {"mean_acquisition_cost", cost / n},
            {"expected_cost", expected_cost(model, s.costs, rates) + cost / n}};
}

void add_figures(OutputBundle& bundle, const Scenario& s, const std::vector<int>& ids) {
    for (int id : ids) {
        const FigureTable table = emit_figure_data(id, s);
        const std::string stem = "figure" + std::to_string(id);
        bundle.csv[stem + ".csv"] = figure_grid_csv(table);
        json doc = {{"figure_id", id}, {"title", table.title}, {"metadata", table.metadata}};
        json columns = json::array();
        for (const auto& c : table.columns) columns.push_back(c.first);
        doc["columns"] = columns;
        if (!table.round_columns.empty()) {
            bundle.csv[stem + "_rounds.csv"] = figure_rounds_csv(table);
            json rc = json::array();
            for (const auto& c : table.round_columns) rc.push_back(c.first);
            doc["round_columns"] = rc;
        }
        bundle.json[stem + ".json"] = doc;
    }
}

void report_manifest(std::ostream& out, const std::string& dir, const std::vector<ManifestEntry>& manifest) {
    out << "wrote " << manifest.size() << " files + " << kManifestName << " to " << dir << "\n";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out_dir,
            std::ostream& out) {
    Scenario s = load_config(config_path);
    if (seed) s.seed = *seed;
    // Echoes keep the configured directory so artifacts do not depend on --out.
    const std::string dir = out_dir.value_or(s.output.directory);

    const PopulationModel model = s.population_model();
    const ResolvedPolicy policy = resolve_policy(s);
    OutputBundle bundle;
    json summary;
    summary["scenario"] = scenario_to_json(s);
    summary["effective_seed"] = s.seed;
    summary["policy"] = to_string(policy.kind);
    summary["point_rule"] = rule_json(policy.point);
    bundle.text["config.yaml"] = emit_config(s);

    std::vector<std::pair<std::string, ErrorRates>> named;
    const bool lr_monotone = model.equal_variance() && model.cond0().mean < model.cond1().mean;
    if (lr_monotone) {
        const DecisionRule optimal = bayes_rule(model, s.costs);
        summary["bayes_rule"] = rule_json(optimal);
        named.emplace_back("bayes_rule", error_rates_analytic(model, optimal));
    }
    switch (policy.kind) {
        case PolicyKind::point: {
            const ErrorRates r = error_rates_analytic(model, policy.point);
            named.emplace_back("policy", r);
            summary["rates"] = to_json(r);
            summary["risk"] = risk_json(bayes_risk(model, s.costs, policy.point));
            if (s.mc_samples > 0) {
                const ErrorRates mc = error_rates_mc(model, policy.point, s.mc_samples, derive_seed(s.seed, {0x3C}));
                named.emplace_back("policy_mc", mc);
                summary["rates_mc"] = to_json(mc);
            }
            break;
        }
        case PolicyKind::band: {
            const ErrorRates r = band_error_rates(model, *policy.band, policy.oracle);
            named.emplace_back("policy", r);
            named.emplace_back("point_rule_at_upper", error_rates_analytic(model, rule_at(model, policy.band->upper)));
            summary["band"] = {{"lower", policy.band->lower}, {"upper", policy.band->upper}};
            summary["rates"] = to_json(r);
            summary["expected_cost"] = expected_cost(model, s.costs, r);
            break;
        }
        case PolicyKind::schedule: {
            const auto& t = policy.schedule->thresholds();
            summary["schedule"] = t;
            for (std::size_t k = 0; k < t.size(); ++k)
                named.emplace_back("round_" + std::to_string(k), error_rates_analytic(model, rule_at(model, t[k])));
            break;
        }
        case PolicyKind::acquisition:
            if (s.mc_samples > 0) summary["acquisition"] = acquisition_summary(model, *policy.acquisition, s);
            break;
    }
    bundle.csv["rates.csv"] = rates_csv(named);

    if (const auto grouped = s.grouped_population()) {
        const GroupRates rates = group_error_rates(*grouped, policy.point);
        json groups = json::object();
        for (const auto& [id, r] : rates) groups[id] = to_json(r);
        json gaps = json::array();
        for (auto a = rates.begin(); a != rates.end(); ++a)
            for (auto b = std::next(a); b != rates.end(); ++b)
                gaps.push_back({{"group_a", a->first}, {"group_b", b->first}, {"eo_gap", eo_gap(rates, a->first, b->first)}});
        summary["groups"] = {{"rates", groups}, {"eo_gaps", gaps}};
    }

    if (s.mc_samples > 0) {
        const auto samples = sample_population(model, s.mc_samples, derive_seed(s.seed, {0xCA1}));
        std::vector<CalibrationPoint> preds;
        preds.reserve(samples.size());
        for (const auto& smp : samples) preds.push_back({model.posterior1(smp.x), smp.true_label});
        summary["calibration"] = {{"ece", ece(preds, 10)}, {"bins", 10}, {"samples", s.mc_samples}};
    }

    const SimulationResult sim = run_simulation(s, {.keep_decisions = false});
    bundle.csv["trajectory.csv"] = trajectory_csv(sim.summaries);
    summary["simulation"] = {{"rounds", s.feedback.rounds},
                             {"cumulative_false_negatives", sim.cumulative_false_negatives()},
                             {"mean_final_q", sim.mean_final_q()},
                             {"n_observed", sim.estimate.n_observed},
                             {"est_mean1", sim.estimate.has_update() ? json(sim.estimate.est_mean1) : json(nullptr)}};

    add_figures(bundle, s, s.output.figures);
    bundle.json["summary.json"] = summary;
    const auto manifest = write_outputs(bundle, dir, s.output.formats);
    report_manifest(out, dir, manifest);
    return 0;
}

int cmd_reproduce(int figure, std::optional<std::uint64_t> seed, const std::string& out_dir, std::ostream& out) {
    Scenario s;
    if (seed) s.seed = *seed;
    s.output.figures = {figure};
    OutputBundle bundle;
    add_figures(bundle, s, s.output.figures);
    bundle.json["figure" + std::to_string(figure) + ".json"]["scenario"] = scenario_to_json(s);
    const auto manifest = write_outputs(bundle, out_dir, {"csv", "json"});
    report_manifest(out, out_dir, manifest);
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<double>& values,
              std::optional<std::uint64_t> seed, std::optional<std::string> out_dir, std::ostream& out) {
    if (param != "cost_ratio") throw std::invalid_argument("unsupported sweep parameter '" + param + "' (supported: cost_ratio)");
    if (values.empty()) throw std::invalid_argument("--values needs at least one value");
    Scenario s = load_config(config_path);
    if (seed) s.seed = *seed;
    const std::string dir = out_dir.value_or(s.output.directory);
    const PopulationModel model = s.population_model();

    CsvTable table;
    table.header = {"cost_ratio", "c01", "c10", "eta", "threshold", "fpr", "fnr", "tpr", "tnr", "risk", "regret"};
    json rows = json::array();
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("cost ratios must be positive and finite");
        Scenario point = s;
        point.costs = CostSpec(v, 1.0);
        const DecisionRule rule = scenario_rule(point);
        const ErrorRates r = error_rates_analytic(model, rule);
        const RiskReport risk = bayes_risk(model, point.costs, rule);
        table.rows.push_back({v, point.costs.c01, point.costs.c10, rule.eta, rule.x_star, r.fpr, r.fnr, r.tpr, r.tnr,
                              risk.risk, risk.regret});
        rows.push_back({{"cost_ratio", v}, {"rule", rule_json(rule)}, {"rates", to_json(r)}, {"risk", risk_json(risk)}});
    }
    OutputBundle bundle;
    bundle.csv["sweep.csv"] = table;
    bundle.json["summary.json"] = {{"scenario", scenario_to_json(s)},
                                   {"effective_seed", s.seed},
                                   {"sweep", {{"param", param}, {"values", values}, {"rows", rows}}}};
    bundle.text["config.yaml"] = emit_config(s);
    const auto manifest = write_outputs(bundle, dir, s.output.formats);
    report_manifest(out, dir, manifest);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cost-sensitive trust decisions: Bayes rules, humble policies, feedback simulation", "humble"};
    app.require_subcommand(1);

    std::string config_path, out_dir, param;
    std::uint64_t seed = 0;
    int figure = 0;
    std::vector<double> values;

    auto* run = app.add_subcommand("run", "Run a scenario from a config file");
    run->add_option("--config", config_path, "Scenario YAML file")->required();
    auto* run_seed = run->add_option("--seed", seed, "Override the config seed");
    auto* run_out = run->add_option("--out", out_dir, "Override the output directory");

    auto* reproduce = app.add_subcommand("reproduce", "Emit the data table for one preset figure");
    reproduce->add_option("--figure", figure, "Figure id")->required()->check(CLI::Range(1, 8));
    reproduce->add_option("--out", out_dir, "Output directory")->required();
    auto* rep_seed = reproduce->add_option("--seed", seed, "Seed for the Monte Carlo cross-check");

    auto* sweep = app.add_subcommand("sweep", "Sweep one parameter over a list of values");
    sweep->add_option("--config", config_path, "Scenario YAML file")->required();
    sweep->add_option("--param", param, "Parameter to sweep (cost_ratio)")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    auto* sweep_seed = sweep->add_option("--seed", seed, "Override the config seed");
    auto* sweep_out = sweep->add_option("--out", out_dir, "Override the output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    auto opt_seed = [&](CLI::Option* o) { return o->count() ? std::optional<std::uint64_t>(seed) : std::nullopt; };
    auto opt_out = [&](CLI::Option* o) { return o->count() ? std::optional<std::string>(out_dir) : std::nullopt; };
    try {
        if (*run) return cmd_run(config_path, opt_seed(run_seed), opt_out(run_out), out);
        if (*reproduce) return cmd_reproduce(figure, opt_seed(rep_seed), out_dir, out);
        if (*sweep) return cmd_sweep(config_path, param, values, opt_seed(sweep_seed), opt_out(sweep_out), out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 2;
}

}  // namespace humble
