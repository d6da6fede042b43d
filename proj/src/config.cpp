#include "humble/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace humble {

namespace {

std::string describe(const std::string& key_path, const std::string& message, int line, int column) {
    std::string out = "config error";
    if (!key_path.empty()) out += " at '" + key_path + "'";
    if (line > 0) out += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
    return out + ": " + message;
}

}  // namespace

ConfigError::ConfigError(std::string key_path, const std::string& message, int line, int column)
    : std::runtime_error(describe(key_path, message, line, column)),
      key_path_(std::move(key_path)),
      line_(line),
      column_(column) {}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& path, const std::string& message) {
    const auto mark = node.Mark();
    if (mark.is_null()) throw ConfigError(path, message);
    throw ConfigError(path, message, mark.line + 1, mark.column + 1);
}

// A mapping node whose keys are checked against an allow-list.
class Section {
public:
    Section(const YAML::Node& node, std::string path, std::set<std::string> allowed)
        : node_(node), path_(std::move(path)) {
        if (!node_ || node_.IsNull()) return;
        if (!node_.IsMap()) fail_at(node_, path_, "expected a mapping");
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail_at(kv.first, join(path_, key), "unknown key");
        }
    }

    YAML::Node child(const std::string& key) const {
        if (!node_ || node_.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
        return node_[key];
    }
    std::string path(const std::string& key) const { return join(path_, key); }

    void read(const std::string& key, double& out) const {
        const auto n = child(key);
        if (!n) return;
        out = as_double(n, path(key));
    }
    void read(const std::string& key, std::optional<double>& out) const {
        const auto n = child(key);
        if (!n) return;
        if (n.IsNull()) {
            out.reset();
            return;
        }
        out = as_double(n, path(key));
    }
    void read(const std::string& key, std::size_t& out) const {
        const auto n = child(key);
        if (!n) return;
        out = as_count(n, path(key));
    }
    void read(const std::string& key, std::optional<std::size_t>& out) const {
        const auto n = child(key);
        if (!n) return;
        if (n.IsNull()) {
            out.reset();
            return;
        }
        out = as_count(n, path(key));
    }
    void read_u64(const std::string& key, std::uint64_t& out) const {
        const auto n = child(key);
        if (!n) return;
        scalar(n, path(key));
        try {
            out = n.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            fail_at(n, path(key), "expected a non-negative integer");
        }
    }
    void read(const std::string& key, bool& out) const {
        const auto n = child(key);
        if (!n) return;
        scalar(n, path(key));
        try {
            out = n.as<bool>();
        } catch (const YAML::Exception&) {
            fail_at(n, path(key), "expected true or false");
        }
    }
    void read(const std::string& key, std::string& out) const {
        const auto n = child(key);
        if (!n) return;
        scalar(n, path(key));
        out = n.as<std::string>();
    }

    template <typename Enum>
    void read_enum(const std::string& key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> options) const {
        const auto n = child(key);
        if (!n) return;
        scalar(n, path(key));
        const auto v = n.as<std::string>();
        std::string names;
        for (const auto& [name, value] : options) {
            if (v == name) {
                out = value;
                return;
            }
            names += names.empty() ? name : std::string("|") + name;
        }
        fail_at(n, path(key), "expected one of " + names);
    }

private:
    static void scalar(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar()) fail_at(n, path, "expected a scalar value");
    }
    static double as_double(const YAML::Node& n, const std::string& path) {
        scalar(n, path);
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) fail_at(n, path, "must be finite");
            return v;
        } catch (const YAML::Exception&) {
            fail_at(n, path, "expected a number");
        }
    }
    static std::size_t as_count(const YAML::Node& n, const std::string& path) {
        scalar(n, path);
        try {
            const long long v = n.as<long long>();
            if (v < 0) fail_at(n, path, "must be >= 0");
            return static_cast<std::size_t>(v);
        } catch (const YAML::Exception&) {
            fail_at(n, path, "expected a non-negative integer");
        }
    }

    YAML::Node node_;
    std::string path_;
};

const std::set<std::string> kModelKeys{"mean0", "mean1", "stddev0", "stddev1", "prior0", "prior1"};

template <typename Spec>
void read_model_keys(const Section& s, Spec& m) {
    s.read("mean0", m.mean0);
    s.read("mean1", m.mean1);
    s.read("stddev0", m.stddev0);
    s.read("stddev1", m.stddev1);
    s.read("prior0", m.prior0);
    s.read("prior1", m.prior1);
}

ModelSpec read_model(const YAML::Node& node) {
    auto keys = kModelKeys;
    keys.insert("groups");
    const Section s(node, "model", keys);
    ModelSpec m;
    read_model_keys(s, m);
    const auto groups = s.child("groups");
    if (groups && !groups.IsNull()) {
        if (!groups.IsSequence()) fail_at(groups, "model.groups", "expected a list");
        for (std::size_t i = 0; i < groups.size(); ++i) {
            auto gkeys = kModelKeys;
            gkeys.insert({"id", "weight"});
            const std::string path = "model.groups[" + std::to_string(i) + "]";
            const Section gs(groups[i], path, gkeys);
            GroupSpec g;
            // Groups inherit the top-level model unless overridden.
            g.mean0 = m.mean0;
            g.mean1 = m.mean1;
            g.stddev0 = m.stddev0;
            g.stddev1 = m.stddev1;
            g.prior0 = m.prior0;
            g.prior1 = m.prior1;
            gs.read("id", g.id);
            gs.read("weight", g.weight);
            read_model_keys(gs, g);
            if (g.id.empty()) fail_at(groups[i], path + ".id", "group id is required");
            m.groups.push_back(g);
        }
    }
    return m;
}

void check(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw ConfigError(path, message);
}

void validate_model(const std::string& path, double mean0, double mean1, double stddev0, double stddev1,
                    double prior0, double prior1) {
    check(stddev0 > 0.0, path + ".stddev0", "must be positive");
    check(stddev1 > 0.0, path + ".stddev1", "must be positive");
    check(prior0 > 0.0 && prior0 < 1.0, path + ".prior0", "must lie strictly inside (0,1)");
    check(prior1 > 0.0 && prior1 < 1.0, path + ".prior1", "must lie strictly inside (0,1)");
    check(std::abs(prior0 + prior1 - 1.0) <= 1e-12, path, "priors must sum to 1");
    check(mean0 <= mean1, path, "mean0 must not exceed mean1 (larger x is trustworthy)");
}

}  // namespace

void validate_scenario(const Scenario& s) {
    const auto& m = s.model;
    validate_model("model", m.mean0, m.mean1, m.stddev0, m.stddev1, m.prior0, m.prior1);
    if (!m.groups.empty()) {
        double total = 0.0;
        std::set<std::string> ids;
        for (std::size_t i = 0; i < m.groups.size(); ++i) {
            const auto& g = m.groups[i];
            const std::string path = "model.groups[" + std::to_string(i) + "]";
            check(!g.id.empty(), path + ".id", "group id is required");
            check(ids.insert(g.id).second, path + ".id", "duplicate group id");
            check(g.weight > 0.0 && g.weight <= 1.0, path + ".weight", "must lie in (0,1]");
            validate_model(path, g.mean0, g.mean1, g.stddev0, g.stddev1, g.prior0, g.prior1);
            total += g.weight;
        }
        check(std::abs(total - 1.0) <= 1e-12, "model.groups", "group weights must sum to 1");
    }
    check(s.costs.c01 > 0.0, "costs.c01", "must be positive");
    check(s.costs.c10 > 0.0, "costs.c10", "must be positive");
    if (s.believed_prior0)
        check(*s.believed_prior0 > 0.0 && *s.believed_prior0 < 1.0, "believed_prior0", "must lie strictly inside (0,1)");

    const auto& p = s.policy;
    const auto& b = p.band;
    if (b.lower && b.upper) check(*b.lower <= *b.upper, "policy.band", "lower must not exceed upper");
    check(b.p_trust >= 0.0 && b.p_trust <= 1.0, "policy.band.p_trust", "must lie in [0,1]");
    check(b.oracle_accuracy >= 0.5 && b.oracle_accuracy <= 1.0, "policy.band.oracle_accuracy", "must lie in [0.5,1]");
    const auto& sc = p.schedule;
    if (sc.start && sc.end) check(*sc.start <= *sc.end, "policy.schedule", "start must not exceed end");
    if (sc.rounds) check(*sc.rounds >= 1, "policy.schedule.rounds", "must be at least 1");
    const auto& a = p.acquisition;
    check(a.confidence_floor > 0.5 && a.confidence_floor < 1.0, "policy.acquisition.confidence_floor",
          "must lie in (0.5,1)");
    check(a.sharpen_factor > 0.0 && a.sharpen_factor < 1.0, "policy.acquisition.sharpen_factor", "must lie in (0,1)");
    check(a.step_cost >= 0.0, "policy.acquisition.step_cost", "must be >= 0");

    const auto& f = s.feedback;
    check(f.rounds >= 1, "feedback.rounds", "must be at least 1");
    check(f.cohort_size >= 1, "feedback.cohort_size", "must be at least 1");
    check(f.delta_up >= 0.0, "feedback.delta_up", "must be >= 0");
    check(f.delta_down >= 0.0, "feedback.delta_down", "must be >= 0");
    check(f.q_alpha > 0.0, "feedback.q_alpha", "must be positive");
    check(f.q_beta > 0.0, "feedback.q_beta", "must be positive");
    check(!f.recalibrate || p.kind == PolicyKind::point, "feedback.recalibrate", "only supported with the point policy");

    for (const auto& fmt : s.output.formats) check(fmt == "csv" || fmt == "json", "output.formats", "unknown format " + fmt);
    for (int id : s.output.figures) check(id >= 1 && id <= 8, "output.figures", "figure ids must lie in 1..8");
    check(!s.output.directory.empty(), "output.directory", "must not be empty");

    // Resolved policy checks (band/schedule defaults need a point threshold).
    try {
        (void)resolve_policy(s);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("policy", e.what());
    }
}

Scenario parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    const Section top(root, "",
                      {"model", "costs", "believed_prior0", "policy", "feedback", "seed", "mc_samples", "output"});
    Scenario s;
    s.model = read_model(top.child("model"));

    const Section costs(top.child("costs"), "costs", {"c01", "c10"});
    costs.read("c01", s.costs.c01);
    costs.read("c10", s.costs.c10);
    top.read("believed_prior0", s.believed_prior0);

    const Section policy(top.child("policy"), "policy", {"kind", "threshold", "band", "schedule", "acquisition"});
    policy.read_enum("kind", s.policy.kind,
                     {{"point", PolicyKind::point},
                      {"band", PolicyKind::band},
                      {"schedule", PolicyKind::schedule},
                      {"acquisition", PolicyKind::acquisition}});
    policy.read("threshold", s.policy.threshold);
    const Section band(policy.child("band"), "policy.band", {"lower", "upper", "action", "p_trust", "oracle_accuracy"});
    band.read("lower", s.policy.band.lower);
    band.read("upper", s.policy.band.upper);
    band.read_enum("action", s.policy.band.action, {{"randomize", BandAction::randomize}, {"defer", BandAction::defer}});
    band.read("p_trust", s.policy.band.p_trust);
    band.read("oracle_accuracy", s.policy.band.oracle_accuracy);
    const Section sched(policy.child("schedule"), "policy.schedule", {"start", "end", "rounds", "shape"});
    sched.read("start", s.policy.schedule.start);
    sched.read("end", s.policy.schedule.end);
    sched.read("rounds", s.policy.schedule.rounds);
    sched.read_enum("shape", s.policy.schedule.shape,
                    {{"linear", ScheduleShape::linear}, {"geometric_gap", ScheduleShape::geometric_gap}});
    const Section acq(policy.child("acquisition"), "policy.acquisition",
                      {"confidence_floor", "sharpen_factor", "max_steps", "step_cost"});
    acq.read("confidence_floor", s.policy.acquisition.confidence_floor);
    acq.read("sharpen_factor", s.policy.acquisition.sharpen_factor);
    acq.read("max_steps", s.policy.acquisition.max_steps);
    acq.read("step_cost", s.policy.acquisition.step_cost);

    const Section fb(top.child("feedback"), "feedback",
                     {"rounds", "cohort_size", "delta_up", "delta_down", "chain_weight", "initial_q", "q_alpha",
                      "q_beta", "recalibrate"});
    fb.read("rounds", s.feedback.rounds);
    fb.read("cohort_size", s.feedback.cohort_size);
    fb.read("delta_up", s.feedback.delta_up);
    fb.read("delta_down", s.feedback.delta_down);
    fb.read("chain_weight", s.feedback.chain_weight);
    fb.read_enum("initial_q", s.feedback.initial_q, {{"beta", InitialQ::beta}, {"prior", InitialQ::prior}});
    fb.read("q_alpha", s.feedback.q_alpha);
    fb.read("q_beta", s.feedback.q_beta);
    fb.read("recalibrate", s.feedback.recalibrate);

    top.read_u64("seed", s.seed);
    top.read("mc_samples", s.mc_samples);

    const Section out(top.child("output"), "output", {"directory", "formats", "figures"});
    out.read("directory", s.output.directory);
    if (const auto formats = out.child("formats")) {
        if (!formats.IsSequence()) fail_at(formats, "output.formats", "expected a list");
        s.output.formats.clear();
        for (const auto& f : formats) s.output.formats.push_back(f.as<std::string>());
    }
    if (const auto figures = out.child("figures")) {
        if (!figures.IsSequence()) fail_at(figures, "output.figures", "expected a list");
        s.output.figures.clear();
        for (const auto& f : figures) {
            try {
                s.output.figures.push_back(f.as<int>());
            } catch (const YAML::Exception&) {
                fail_at(f, "output.figures", "expected integer figure ids");
            }
        }
    }

    validate_scenario(s);
    return s;
}

Scenario load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

void emit_optional(YAML::Emitter& e, const char* key, const std::optional<double>& v) {
    e << YAML::Key << key << YAML::Value;
    if (v)
        e << *v;
    else
        e << YAML::Null;
}

template <typename Spec>
void emit_model_keys(YAML::Emitter& e, const Spec& m) {
    e << YAML::Key << "mean0" << YAML::Value << m.mean0;
    e << YAML::Key << "mean1" << YAML::Value << m.mean1;
    e << YAML::Key << "stddev0" << YAML::Value << m.stddev0;
    e << YAML::Key << "stddev1" << YAML::Value << m.stddev1;
    e << YAML::Key << "prior0" << YAML::Value << m.prior0;
    e << YAML::Key << "prior1" << YAML::Value << m.prior1;
}

}  // namespace

std::string emit_config(const Scenario& s) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;

    e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    emit_model_keys(e, s.model);
    e << YAML::Key << "groups" << YAML::Value << YAML::BeginSeq;
    for (const auto& g : s.model.groups) {
        e << YAML::BeginMap << YAML::Key << "id" << YAML::Value << g.id;
        e << YAML::Key << "weight" << YAML::Value << g.weight;
        emit_model_keys(e, g);
        e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;

    e << YAML::Key << "costs" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "c01" << YAML::Value << s.costs.c01;
    e << YAML::Key << "c10" << YAML::Value << s.costs.c10;
    e << YAML::EndMap;
    emit_optional(e, "believed_prior0", s.believed_prior0);

    const auto& p = s.policy;
    e << YAML::Key << "policy" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << to_string(p.kind);
    emit_optional(e, "threshold", p.threshold);
    e << YAML::Key << "band" << YAML::Value << YAML::BeginMap;
    emit_optional(e, "lower", p.band.lower);
    emit_optional(e, "upper", p.band.upper);
    e << YAML::Key << "action" << YAML::Value << to_string(p.band.action);
    e << YAML::Key << "p_trust" << YAML::Value << p.band.p_trust;
    e << YAML::Key << "oracle_accuracy" << YAML::Value << p.band.oracle_accuracy;
    e << YAML::EndMap;
    e << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
    emit_optional(e, "start", p.schedule.start);
    emit_optional(e, "end", p.schedule.end);
    e << YAML::Key << "rounds" << YAML::Value;
    if (p.schedule.rounds)
        e << static_cast<unsigned long long>(*p.schedule.rounds);
    else
        e << YAML::Null;
    e << YAML::Key << "shape" << YAML::Value << to_string(p.schedule.shape);
    e << YAML::EndMap;
    e << YAML::Key << "acquisition" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "confidence_floor" << YAML::Value << p.acquisition.confidence_floor;
    e << YAML::Key << "sharpen_factor" << YAML::Value << p.acquisition.sharpen_factor;
    e << YAML::Key << "max_steps" << YAML::Value << static_cast<unsigned long long>(p.acquisition.max_steps);
    e << YAML::Key << "step_cost" << YAML::Value << p.acquisition.step_cost;
    e << YAML::EndMap;
    e << YAML::EndMap;

    const auto& f = s.feedback;
    e << YAML::Key << "feedback" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "rounds" << YAML::Value << static_cast<unsigned long long>(f.rounds);
    e << YAML::Key << "cohort_size" << YAML::Value << static_cast<unsigned long long>(f.cohort_size);
    e << YAML::Key << "delta_up" << YAML::Value << f.delta_up;
    e << YAML::Key << "delta_down" << YAML::Value << f.delta_down;
    e << YAML::Key << "chain_weight" << YAML::Value << f.chain_weight;
    e << YAML::Key << "initial_q" << YAML::Value << to_string(f.initial_q);
    e << YAML::Key << "q_alpha" << YAML::Value << f.q_alpha;
    e << YAML::Key << "q_beta" << YAML::Value << f.q_beta;
    e << YAML::Key << "recalibrate" << YAML::Value << f.recalibrate;
    e << YAML::EndMap;

    e << YAML::Key << "seed" << YAML::Value << static_cast<unsigned long long>(s.seed);
    e << YAML::Key << "mc_samples" << YAML::Value << static_cast<unsigned long long>(s.mc_samples);

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << s.output.directory;
    e << YAML::Key << "formats" << YAML::Value << YAML::Flow << s.output.formats;
    e << YAML::Key << "figures" << YAML::Value << YAML::Flow << s.output.figures;
    e << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

nlohmann::json scenario_to_json(const Scenario& s) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    auto model_keys = [](const auto& m) {
        return json{{"mean0", m.mean0},     {"mean1", m.mean1},   {"stddev0", m.stddev0},
                    {"stddev1", m.stddev1}, {"prior0", m.prior0}, {"prior1", m.prior1}};
    };
    json model = model_keys(s.model);
    model["groups"] = json::array();
    for (const auto& g : s.model.groups) {
        json gj = model_keys(g);
        gj["id"] = g.id;
        gj["weight"] = g.weight;
        model["groups"].push_back(gj);
    }
    const auto& p = s.policy;
    const auto& f = s.feedback;
    return {
        {"model", model},
        {"costs", {{"c01", s.costs.c01}, {"c10", s.costs.c10}}},
        {"believed_prior0", opt(s.believed_prior0)},
        {"policy",
         {{"kind", to_string(p.kind)},
          {"threshold", opt(p.threshold)},
          {"band",
           {{"lower", opt(p.band.lower)},
            {"upper", opt(p.band.upper)},
            {"action", to_string(p.band.action)},
            {"p_trust", p.band.p_trust},
            {"oracle_accuracy", p.band.oracle_accuracy}}},
          {"schedule",
           {{"start", opt(p.schedule.start)},
            {"end", opt(p.schedule.end)},
            {"rounds", p.schedule.rounds ? json(*p.schedule.rounds) : json(nullptr)},
            {"shape", to_string(p.schedule.shape)}}},
          {"acquisition",
           {{"confidence_floor", p.acquisition.confidence_floor},
            {"sharpen_factor", p.acquisition.sharpen_factor},
            {"max_steps", p.acquisition.max_steps},
            {"step_cost", p.acquisition.step_cost}}}}},
        {"feedback",
         {{"rounds", f.rounds},
          {"cohort_size", f.cohort_size},
          {"delta_up", f.delta_up},
          {"delta_down", f.delta_down},
          {"chain_weight", f.chain_weight},
          {"initial_q", to_string(f.initial_q)},
          {"q_alpha", f.q_alpha},
          {"q_beta", f.q_beta},
          {"recalibrate", f.recalibrate}}},
        {"seed", s.seed},
        {"mc_samples", s.mc_samples},
        {"output", {{"directory", s.output.directory}, {"formats", s.output.formats}, {"figures", s.output.figures}}},
    };
}

}  // namespace humble
