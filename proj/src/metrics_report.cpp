#include "humble/metrics_report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace humble {

using nlohmann::json;

GroupRates group_error_rates(const GroupedPopulation& population, const DecisionRule& rule) {
    GroupRates out;
    for (const auto& g : population.groups()) out.emplace(g.group_id, error_rates_analytic(g.model, rule));
    return out;
}

double eo_gap(const GroupRates& rates, const std::string& group_a, const std::string& group_b) {
    const auto a = rates.find(group_a);
    if (a == rates.end()) throw std::out_of_range("group not present: " + group_a);
    const auto b = rates.find(group_b);
    if (b == rates.end()) throw std::out_of_range("group not present: " + group_b);
    return std::abs(a->second.tpr - b->second.tpr);
}

double ece(std::span<const CalibrationPoint> predictions, std::size_t bins) {
    if (predictions.empty()) throw std::invalid_argument("ece needs at least one prediction");
    if (bins == 0) throw std::invalid_argument("ece needs at least one bin");
    // Sorted copy: the sums no longer depend on input order.
    std::vector<CalibrationPoint> sorted(predictions.begin(), predictions.end());
    std::sort(sorted.begin(), sorted.end(), [](const CalibrationPoint& l, const CalibrationPoint& r) {
        return l.posterior1 < r.posterior1 || (l.posterior1 == r.posterior1 && l.outcome < r.outcome);
    });
    std::vector<double> conf(bins, 0.0);
    std::vector<std::size_t> hits(bins, 0), count(bins, 0);
    for (const auto& p : sorted) {
        if (!(p.posterior1 >= 0.0 && p.posterior1 <= 1.0)) throw std::invalid_argument("posterior outside [0,1]");
        if (p.outcome != 0 && p.outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");
        const auto b = std::min(bins - 1, static_cast<std::size_t>(p.posterior1 * static_cast<double>(bins)));
        conf[b] += p.posterior1;
        hits[b] += static_cast<std::size_t>(p.outcome);
        ++count[b];
    }
    const double n = static_cast<double>(sorted.size());
    double total = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (count[b] == 0) continue;
        const double nb = static_cast<double>(count[b]);
        total += nb / n * std::abs(conf[b] / nb - static_cast<double>(hits[b]) / nb);
    }
    return total;
}

const std::vector<double>& FigureTable::column(const std::string& name) const {
    for (const auto& [n, v] : columns)
        if (n == name) return v;
    throw std::out_of_range("no column " + name);
}

const std::vector<double>& FigureTable::round_column(const std::string& name) const {
    for (const auto& [n, v] : round_columns)
        if (n == name) return v;
    throw std::out_of_range("no round column " + name);
}

// ---------------------------------------------------------------------------
// Figure presets

namespace {

constexpr double kMistakenPrior0 = 0.9;
constexpr double kSharpenFactor = 0.5;
constexpr std::size_t kScheduleRounds = 10;

double ratio_threshold(const PopulationModel& model, double cost_ratio) {
    return bayes_rule(model, CostSpec(cost_ratio, 1.0)).x_star;
}

json model_json(const PopulationModel& m) {
    return {{"mean0", m.cond0().mean},   {"mean1", m.cond1().mean}, {"stddev0", m.cond0().stddev},
            {"stddev1", m.cond1().stddev}, {"prior0", m.prior0()},    {"prior1", m.prior1()}};
}

json rates_meta(const ErrorRates& r) { return to_json(r); }

struct Grid {
    std::vector<double> x, d0, d1;
};

Grid make_grid(const PopulationModel& range_model, const PopulationModel& density_model) {
    Grid g;
    const double lo = range_model.cond0().mean - 4.0 * range_model.cond0().stddev;
    const double hi = range_model.cond1().mean + 4.0 * range_model.cond1().stddev;
    g.x.resize(kFigureGridPoints);
    for (std::size_t i = 0; i < kFigureGridPoints; ++i)
        g.x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kFigureGridPoints - 1);
    for (double x : g.x) {
        g.d0.push_back(density_model.cond0().pdf(x));
        g.d1.push_back(density_model.cond1().pdf(x));
    }
    return g;
}

std::vector<double> constant(double v) { return std::vector<double>(kFigureGridPoints, v); }

// Density where the rule trusts an untrustworthy person (x > t).
std::vector<double> fp_region(const Grid& g, double t) {
    std::vector<double> out(g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) out[i] = g.x[i] > t ? g.d0[i] : 0.0;
    return out;
}

// Density where the rule distrusts a trustworthy person (x <= t).
std::vector<double> fn_region(const Grid& g, double t) {
    std::vector<double> out(g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) out[i] = g.x[i] <= t ? g.d1[i] : 0.0;
    return out;
}

void add_mc(json& meta, const PopulationModel& model, const DecisionRule& rule, const Scenario& s, int figure_id) {
    if (s.mc_samples == 0) return;
    const auto mc = error_rates_mc(model, rule, s.mc_samples, derive_seed(s.seed, {static_cast<std::uint64_t>(figure_id)}));
    meta["mc"] = rates_meta(mc);
}

void point_figure(FigureTable& t, const PopulationModel& model, const Scenario& s, double cost_ratio) {
    const CostSpec costs(cost_ratio, 1.0);
    const DecisionRule rule = bayes_rule(model, costs);
    const Grid g = make_grid(model, model);
    const ErrorRates r = error_rates_analytic(model, rule);
    t.columns = {{"x", g.x},
                 {"density0", g.d0},
                 {"density1", g.d1},
                 {"threshold", constant(rule.x_star)},
                 {"fp_region", fp_region(g, rule.x_star)},
                 {"fn_region", fn_region(g, rule.x_star)}};
    t.metadata["cost_ratio"] = cost_ratio;
    t.metadata["c01"] = costs.c01;
    t.metadata["c10"] = costs.c10;
    t.metadata["eta"] = rule.eta;
    t.metadata["threshold"] = rule.x_star;
    t.metadata["fpr"] = r.fpr;
    t.metadata["fnr"] = r.fnr;
    t.metadata["risk"] = bayes_risk(model, costs, rule).risk;
    add_mc(t.metadata, model, rule, s, t.figure_id);
}

void band_figure(FigureTable& t, const PopulationModel& model, double cost_ratio) {
    const CostSpec costs(cost_ratio, 1.0);
    const double lower = ratio_threshold(model, 1.0);
    const double upper = ratio_threshold(model, cost_ratio);
    const BandPolicy defer(lower, upper, Defer{});
    const BandPolicy randomize(lower, upper, Randomize{0.5});
    const OracleModel perfect(1.0);
    const ErrorRates deferred = band_error_rates(model, defer, perfect);
    const ErrorRates randomized = band_error_rates(model, randomize, std::nullopt);
    const ErrorRates at_upper = error_rates_analytic(model, rule_at(model, upper));
    const ErrorRates at_lower = error_rates_analytic(model, rule_at(model, lower));
    const Grid g = make_grid(model, model);
    t.columns = {{"x", g.x},
                 {"density0", g.d0},
                 {"density1", g.d1},
                 {"threshold", constant(upper)},
                 {"band_lower", constant(lower)},
                 {"band_upper", constant(upper)},
                 {"fp_region", fp_region(g, upper)},
                 {"fn_region", fn_region(g, lower)}};
    t.metadata["cost_ratio"] = cost_ratio;
    t.metadata["c01"] = costs.c01;
    t.metadata["c10"] = costs.c10;
    t.metadata["band_lower"] = lower;
    t.metadata["band_upper"] = upper;
    t.metadata["oracle_accuracy"] = perfect.accuracy;
    t.metadata["fpr"] = deferred.fpr;
    t.metadata["fnr"] = deferred.fnr;
    t.metadata["deferral_rate"] = deferred.deferral_rate;
    t.metadata["defer"] = rates_meta(deferred);
    t.metadata["randomize_p_trust"] = 0.5;
    t.metadata["randomize"] = rates_meta(randomized);
    t.metadata["point_rule_at_upper"] = rates_meta(at_upper);
    t.metadata["point_rule_at_lower"] = rates_meta(at_lower);
}

}  // namespace

FigureTable emit_figure_data(int figure_id, const Scenario& scenario) {
    if (figure_id < 1 || figure_id > 8) throw std::invalid_argument("unknown figure id " + std::to_string(figure_id));
    const PopulationModel model = scenario.population_model();
    if (!model.equal_variance()) throw UnsupportedModel("figure presets need equal class stddevs");

    FigureTable t;
    t.figure_id = figure_id;
    t.metadata["figure_id"] = figure_id;
    t.metadata["model"] = model_json(model);
    t.metadata["seed"] = scenario.seed;
    t.metadata["mc_samples"] = scenario.mc_samples;

    switch (figure_id) {
        case 1:
            t.title = "equal false-positive and false-negative costs";
            point_figure(t, model, scenario, 1.0);
            break;
        case 2:
            t.title = "false-positive cost 9x the false-negative cost";
            point_figure(t, model, scenario, 9.0);
            break;
        case 3:
            t.title = "false-positive cost 27x the false-negative cost";
            point_figure(t, model, scenario, 27.0);
            break;
        case 4: {
            t.title = "threshold from a mistaken belief about the class priors";
            const CostSpec unit(1.0, 1.0);
            const DecisionRule best = bayes_rule(model, unit);
            const DecisionRule mistaken = mistaken_prior_rule(model, kMistakenPrior0, unit);
            const RiskReport report = bayes_risk(model, unit, mistaken);
            const CostSpec costly(9.0, 1.0);
            const RiskReport costly_report = bayes_risk(model, costly, mistaken_prior_rule(model, kMistakenPrior0, costly));
            const Grid g = make_grid(model, model);
            const ErrorRates r = error_rates_analytic(model, mistaken);
            t.columns = {{"x", g.x},
                         {"density0", g.d0},
                         {"density1", g.d1},
                         {"threshold", constant(best.x_star)},
                         {"mistaken_threshold", constant(mistaken.x_star)},
                         {"fp_region", fp_region(g, mistaken.x_star)},
                         {"fn_region", fn_region(g, mistaken.x_star)}};
            t.metadata["cost_ratio"] = 1.0;
            t.metadata["believed_prior0"] = kMistakenPrior0;
            t.metadata["threshold"] = best.x_star;
            t.metadata["mistaken_threshold"] = mistaken.x_star;
            t.metadata["bayes"] = rates_meta(error_rates_analytic(model, best));
            t.metadata["fpr"] = r.fpr;
            t.metadata["fnr"] = r.fnr;
            t.metadata["risk"] = report.risk;
            t.metadata["regret"] = report.regret;
            t.metadata["cost_ratio_9"] = {{"mistaken_threshold", costly_report.threshold_used},
                                          {"risk", costly_report.risk},
                                          {"regret", costly_report.regret}};
            add_mc(t.metadata, model, mistaken, scenario, figure_id);
            break;
        }
        case 5: {
            t.title = "narrower likelihoods from more informative features";
            const PopulationModel sharp = sharpen(model, kSharpenFactor);
            const CostSpec unit(1.0, 1.0);
            const DecisionRule rule = bayes_rule(sharp, unit);
            const ErrorRates r = error_rates_analytic(sharp, rule);
            const ErrorRates before = error_rates_analytic(model, bayes_rule(model, unit));
            const Grid g = make_grid(model, sharp);
            const Grid orig = make_grid(model, model);
            t.columns = {{"x", g.x},
                         {"density0", g.d0},
                         {"density1", g.d1},
                         {"density0_original", orig.d0},
                         {"density1_original", orig.d1},
                         {"threshold", constant(rule.x_star)},
                         {"fp_region", fp_region(g, rule.x_star)},
                         {"fn_region", fn_region(g, rule.x_star)}};
            t.metadata["cost_ratio"] = 1.0;
            t.metadata["sharpen_factor"] = kSharpenFactor;
            t.metadata["threshold"] = rule.x_star;
            t.metadata["fpr"] = r.fpr;
            t.metadata["fnr"] = r.fnr;
            t.metadata["original"] = rates_meta(before);
            add_mc(t.metadata, sharp, rule, scenario, figure_id);
            break;
        }
        case 6:
            t.title = "band between the balanced and cost-9 thresholds";
            band_figure(t, model, 9.0);
            break;
        case 7:
            t.title = "wider band between the balanced and cost-27 thresholds";
            band_figure(t, model, 27.0);
            break;
        case 8: {
            t.title = "threshold moving from lenient to stringent over rounds";
            const double start = ratio_threshold(model, 1.0);
            const double end = ratio_threshold(model, 27.0);
            const ThresholdSchedule schedule = make_schedule(start, end, kScheduleRounds, ScheduleShape::linear);
            const Grid g = make_grid(model, model);
            t.columns = {{"x", g.x}, {"density0", g.d0}, {"density1", g.d1}};
            std::vector<double> round, fpr, fnr;
            for (std::size_t k = 0; k < schedule.rounds(); ++k) {
                const ErrorRates r = error_rates_analytic(model, rule_at(model, schedule.at(k)));
                round.push_back(static_cast<double>(k));
                fpr.push_back(r.fpr);
                fnr.push_back(r.fnr);
            }
            t.round_columns = {{"round", round}, {"threshold", schedule.thresholds()}, {"fpr", fpr}, {"fnr", fnr}};
            t.metadata["cost_ratio"] = 27.0;
            t.metadata["schedule"] = {{"shape", "linear"},
                                      {"start", start},
                                      {"end", end},
                                      {"rounds", kScheduleRounds},
                                      {"thresholds", schedule.thresholds()}};
            t.metadata["fpr"] = fpr;
            t.metadata["fnr"] = fnr;
            break;
        }
    }
    t.metadata["title"] = t.title;
    return t;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    const auto& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_json(std::ostringstream& os, const json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << inner << json(it.key()).dump() << ": ";
                write_json(os, it.value(), indent + 1);
            }
            os << "\n" << pad << "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) os << ",\n";
                os << inner;
                write_json(os, v[i], indent + 1);
            }
            os << "\n" << pad << "]";
            return;
        }
        case json::value_t::number_float: {
            const double d = v.get<double>();
            os << (std::isfinite(d) ? format_double(d) : "null");
            return;
        }
        default:
            os << v.dump();
    }
}

}  // namespace

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += csv_field(table.header[i]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw std::invalid_argument("csv row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_field(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string to_json_text(const json& value) {
    std::ostringstream os;
    write_json(os, value, 0);
    os << "\n";
    return os.str();
}

namespace {

CsvTable columns_csv(const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
    CsvTable t;
    std::size_t rows = columns.empty() ? 0 : columns.front().second.size();
    for (const auto& [name, values] : columns) {
        if (values.size() != rows) throw std::invalid_argument("figure column lengths differ: " + name);
        t.header.push_back(name);
    }
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<Cell> row;
        for (const auto& c : columns) row.emplace_back(c.second[r]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace

CsvTable figure_grid_csv(const FigureTable& table) { return columns_csv(table.columns); }

CsvTable figure_rounds_csv(const FigureTable& table) { return columns_csv(table.round_columns); }

CsvTable trajectory_csv(std::span<const RoundSummary> summaries) {
    CsvTable t;
    t.header = {"round",     "threshold", "cohort",   "positives",  "trusted",
                "false_positives", "false_negatives", "deferred", "observed", "chained_false_negatives",
                "mean_q",    "est_mean1", "n_observed"};
    auto i64 = [](std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; };
    for (const auto& s : summaries) {
        t.rows.push_back({i64(s.round), s.threshold, i64(s.cohort), i64(s.positives), i64(s.trusted),
                          i64(s.false_positives), i64(s.false_negatives), i64(s.deferred), i64(s.observed),
                          i64(s.chained_false_negatives), s.mean_q, s.est_mean1, i64(s.n_observed)});
    }
    return t;
}

CsvTable rates_csv(const std::vector<std::pair<std::string, ErrorRates>>& named_rates) {
    CsvTable t;
    t.header = {"name", "fpr", "fnr", "tpr", "tnr", "deferral_rate", "stderr_fpr", "stderr_fnr"};
    for (const auto& [name, r] : named_rates)
        t.rows.push_back({name, r.fpr, r.fnr, r.tpr, r.tnr, r.deferral_rate, r.stderr_fpr, r.stderr_fnr});
    return t;
}

json to_json(const ErrorRates& r) {
    return {{"fpr", r.fpr},
            {"fnr", r.fnr},
            {"tpr", r.tpr},
            {"tnr", r.tnr},
            {"deferral_rate", r.deferral_rate},
            {"stderr_fpr", r.stderr_fpr},
            {"stderr_fnr", r.stderr_fnr}};
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::vector<ManifestEntry> write_outputs(const OutputBundle& bundle, const std::filesystem::path& directory,
                                         const std::vector<std::string>& formats) {
    namespace fs = std::filesystem;
    for (const auto& f : formats)
        if (f != "csv" && f != "json") throw std::invalid_argument("unknown output format: " + f);
    auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };

    std::map<std::string, std::string> files;
    if (wants("csv"))
        for (const auto& [name, table] : bundle.csv) files[name] = to_csv(table);
    if (wants("json"))
        for (const auto& [name, doc] : bundle.json) files[name] = to_json_text(doc);
    for (const auto& [name, bytes] : bundle.text) files[name] = bytes;
    if (files.count(kManifestName)) throw std::invalid_argument("output name collides with the manifest");

    std::vector<ManifestEntry> manifest;
    json listing = json::array();
    for (const auto& [name, bytes] : files) {
        manifest.push_back({name, sha256_hex(bytes)});
        listing.push_back({{"file", name}, {"sha256", manifest.back().sha256}});
    }
    files[kManifestName] = to_json_text({{"files", listing}});

    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec || !fs::is_directory(directory))
        throw OutputError("cannot create output directory " + directory.string() + ": " + ec.message());

    std::vector<fs::path> written;
    auto cleanup = [&] {
        std::error_code ignore;
        for (const auto& p : written) fs::remove(p, ignore);
    };
    for (const auto& [name, bytes] : files) {
        const fs::path target = directory / name;
        const fs::path tmp = directory / (name + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (out) out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) {
                std::error_code ignore;
                fs::remove(tmp, ignore);
                cleanup();
                throw OutputError("cannot write " + target.string());
            }
        }
        fs::rename(tmp, target, ec);
        if (ec) {
            std::error_code ignore;
            fs::remove(tmp, ignore);
            cleanup();
            throw OutputError("cannot write " + target.string() + ": " + ec.message());
        }
        written.push_back(target);
    }
    return manifest;
}

}  // namespace humble
