#include "humble/dist_model.hpp"

#include "humble/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace humble {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_label(Label label) {
    if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
}

}  // namespace

GaussianConditional::GaussianConditional(double mean_, double stddev_) : mean(mean_), stddev(stddev_) {
    if (!std::isfinite(mean)) throw std::invalid_argument("conditional mean must be finite");
    if (!(stddev > 0.0) || !std::isfinite(stddev))
        throw std::invalid_argument("conditional stddev must be positive and finite");
}

double GaussianConditional::pdf(double x) const { return std::exp(log_pdf(x)); }

double GaussianConditional::log_pdf(double x) const {
    const double z = (x - mean) / stddev;
    return -0.5 * z * z - std::log(stddev) - kLogSqrt2Pi;
}

double GaussianConditional::cdf(double x) const {
    return 0.5 * std::erfc(-(x - mean) / stddev * kInvSqrt2);
}

double GaussianConditional::survival(double x) const {
    return 0.5 * std::erfc((x - mean) / stddev * kInvSqrt2);
}

PopulationModel::PopulationModel(GaussianConditional cond0, GaussianConditional cond1, double prior0,
                                 double prior1)
    : cond0_(cond0), cond1_(cond1), prior0_(prior0), prior1_(prior1) {
    if (!(prior0 > 0.0 && prior0 < 1.0) || !(prior1 > 0.0 && prior1 < 1.0))
        throw std::invalid_argument("priors must lie strictly inside (0,1)");
    if (std::abs(prior0 + prior1 - 1.0) > 1e-12) throw std::invalid_argument("priors must sum to 1");
    if (cond0.mean > cond1.mean)
        throw std::invalid_argument("cond0.mean must not exceed cond1.mean (larger x is trustworthy)");
}

PopulationModel PopulationModel::equal_variance(double mean0, double mean1, double stddev, double prior0) {
    return PopulationModel({mean0, stddev}, {mean1, stddev}, prior0, 1.0 - prior0);
}

const GaussianConditional& PopulationModel::conditional(Label label) const {
    check_label(label);
    return label == 0 ? cond0_ : cond1_;
}

double PopulationModel::posterior1(double x) const {
    // Logistic of the log posterior odds keeps tails finite.
    const double log_odds = std::log(prior1_) + cond1_.log_pdf(x) - std::log(prior0_) - cond0_.log_pdf(x);
    return 1.0 / (1.0 + std::exp(-log_odds));
}

GroupedPopulation::GroupedPopulation(std::vector<PopulationGroup> groups) : groups_(std::move(groups)) {
    if (groups_.empty()) throw std::invalid_argument("grouped population needs at least one group");
    double total = 0.0;
    for (const auto& g : groups_) {
        if (!(g.weight > 0.0) || g.weight > 1.0)
            throw std::invalid_argument("group weight must lie in (0,1]: " + g.group_id);
        for (const auto& other : groups_)
            if (&other != &g && other.group_id == g.group_id)
                throw std::invalid_argument("duplicate group id: " + g.group_id);
        total += g.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("group weights must sum to 1");
}

const PopulationGroup& GroupedPopulation::group(const std::string& group_id) const {
    for (const auto& g : groups_)
        if (g.group_id == group_id) return g;
    throw std::out_of_range("unknown group: " + group_id);
}

double density(const PopulationModel& model, double x, Label label) { return model.conditional(label).pdf(x); }

double cdf(const PopulationModel& model, double x, Label label) { return model.conditional(label).cdf(x); }

namespace {

Sample draw_one(const PopulationModel& model, Rng& rng) {
    Sample s;
    s.true_label = rng.uniform() < model.prior1() ? 1 : 0;
    const auto& c = model.conditional(s.true_label);
    s.x = rng.normal(c.mean, c.stddev);
    return s;
}

}  // namespace

std::vector<Sample> sample_population(const PopulationModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample count must be at least 1");
    Rng rng(seed);
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Sample s = draw_one(model, rng);
        s.individual_id = i;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sample> sample_population(const GroupedPopulation& population, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample count must be at least 1");
    Rng rng(seed);
    const auto& groups = population.groups();
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t gi = 0;
        double acc = groups[0].weight;
        while (u >= acc && gi + 1 < groups.size()) acc += groups[++gi].weight;
        Sample s = draw_one(groups[gi].model, rng);
        s.group_id = groups[gi].group_id;
        s.individual_id = i;
        out.push_back(std::move(s));
    }
    return out;
}

PopulationModel sharpen(const PopulationModel& model, double k) {
    if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("sharpen factor must lie in (0,1]");
    return PopulationModel({model.cond0().mean, model.cond0().stddev * k},
                           {model.cond1().mean, model.cond1().stddev * k}, model.prior0(), model.prior1());
}

}  // namespace humble
