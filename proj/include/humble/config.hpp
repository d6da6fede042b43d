#pragma once

// Scenario documents are YAML. Unknown keys are rejected, every key has a
// default, and errors name the key path (and the source position when known).
//
//   model:    {mean0, mean1, stddev0, stddev1, prior0, prior1, groups: [{id, weight, ...model keys}]}
//   costs:    {c01, c10}
//   believed_prior0: <probability or null>
//   policy:   {kind: point|band|schedule|acquisition, threshold,
//              band: {lower, upper, action: randomize|defer, p_trust, oracle_accuracy},
//              schedule: {start, end, rounds, shape: linear|geometric_gap},
//              acquisition: {confidence_floor, sharpen_factor, max_steps, step_cost}}
//   feedback: {rounds, cohort_size, delta_up, delta_down, chain_weight,
//              initial_q: beta|prior, q_alpha, q_beta, recalibrate}
//   seed, mc_samples
//   output:   {directory, formats: [csv, json], figures: [1..8]}

#include "humble/scenario.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace humble {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key_path, const std::string& message, int line = -1, int column = -1);

    const std::string& key_path() const { return key_path_; }
    int line() const { return line_; }      ///< 1-based, -1 when unknown
    int column() const { return column_; }  ///< 1-based, -1 when unknown

private:
    std::string key_path_;
    int line_;
    int column_;
};

Scenario parse_config(const std::string& text);
Scenario load_config(const std::filesystem::path& path);

/// Throws ConfigError for any cross-field constraint violation.
void validate_scenario(const Scenario& scenario);

/// YAML echo with every field explicit; parse_config(emit_config(s)) == s.
std::string emit_config(const Scenario& scenario);
nlohmann::json scenario_to_json(const Scenario& scenario);

}  // namespace humble
