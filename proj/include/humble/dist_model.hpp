#pragma once

// Generative population models: one-dimensional class-conditional
// likelihoods p(x|y), class priors, optional group structure, and seeded
// sampling. Label 0 is "untrustworthy", label 1 "trustworthy"; larger
// feature values indicate trustworthiness (cond0.mean <= cond1.mean).

#include <cstdint>
#include <string>
#include <vector>

namespace humble {

using Label = int;  // 0 or 1

struct GaussianConditional {
    double mean = 0.0;
    double stddev = 1.0;

    GaussianConditional() = default;
    GaussianConditional(double mean, double stddev);

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    /// P(X > x), computed without cancellation in the upper tail.
    double survival(double x) const;

    friend bool operator==(const GaussianConditional&, const GaussianConditional&) = default;
};

class PopulationModel {
public:
    /// Throws std::invalid_argument when priors do not sum to one, either
    /// prior is outside (0,1), or cond0.mean > cond1.mean.
    PopulationModel(GaussianConditional cond0, GaussianConditional cond1, double prior0, double prior1);

    /// Equal-variance model {N(mean0, stddev), N(mean1, stddev)} with prior0.
    static PopulationModel equal_variance(double mean0, double mean1, double stddev, double prior0);

    const GaussianConditional& conditional(Label label) const;
    const GaussianConditional& cond0() const { return cond0_; }
    const GaussianConditional& cond1() const { return cond1_; }
    double prior0() const { return prior0_; }
    double prior1() const { return prior1_; }
    double prior(Label label) const { return label == 0 ? prior0_ : prior1_; }
    bool equal_variance() const { return cond0_.stddev == cond1_.stddev; }

    /// P(Y=1 | X=x).
    double posterior1(double x) const;

    friend bool operator==(const PopulationModel&, const PopulationModel&) = default;

private:
    GaussianConditional cond0_;
    GaussianConditional cond1_;
    double prior0_;
    double prior1_;
};

struct PopulationGroup {
    std::string group_id;
    PopulationModel model;
    double weight;

    friend bool operator==(const PopulationGroup&, const PopulationGroup&) = default;
};

class GroupedPopulation {
public:
    /// Weights must be positive and sum to one within 1e-12.
    explicit GroupedPopulation(std::vector<PopulationGroup> groups);

    const std::vector<PopulationGroup>& groups() const { return groups_; }
    const PopulationGroup& group(const std::string& group_id) const;

private:
    std::vector<PopulationGroup> groups_;
};

struct Sample {
    double x = 0.0;
    Label true_label = 0;
    std::string group_id;
    std::uint64_t individual_id = 0;
};

double density(const PopulationModel& model, double x, Label label);
double cdf(const PopulationModel& model, double x, Label label);

/// Draws n labelled samples: label from the priors, then x from the matching
/// conditional. Identical (model, n, seed) yields identical output.
std::vector<Sample> sample_population(const PopulationModel& model, std::size_t n, std::uint64_t seed);
/// Grouped variant: group by weight, then label and feature from that group's model.
std::vector<Sample> sample_population(const GroupedPopulation& population, std::size_t n, std::uint64_t seed);

/// Both stddevs multiplied by k in (0,1]; means and priors unchanged.
PopulationModel sharpen(const PopulationModel& model, double k);

}  // namespace humble
