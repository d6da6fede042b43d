#pragma once

// Fairness and calibration metrics, figure tables, and deterministic
// CSV / JSON output with a SHA-256 manifest.

#include "humble/decision_core.hpp"
#include "humble/feedback_sim.hpp"
#include "humble/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace humble {

using GroupRates = std::map<std::string, ErrorRates>;

/// Analytic rates of one rule in every group of the population.
GroupRates group_error_rates(const GroupedPopulation& population, const DecisionRule& rule);

/// |tpr_A - tpr_B|. Throws std::out_of_range for a missing group.
double eo_gap(const GroupRates& rates, const std::string& group_a, const std::string& group_b);

struct CalibrationPoint {
    double posterior1 = 0.0;
    Label outcome = 0;
};

/// Expected calibration error with `bins` equal-width bins on [0,1]
/// (posterior 1.0 falls in the last bin).
double ece(std::span<const CalibrationPoint> predictions, std::size_t bins = 10);

struct FigureTable {
    int figure_id = 0;
    std::string title;
    std::vector<std::pair<std::string, std::vector<double>>> columns;        ///< over the x grid
    std::vector<std::pair<std::string, std::vector<double>>> round_columns;  ///< figure 8 only
    nlohmann::json metadata;

    const std::vector<double>& column(const std::string& name) const;
    const std::vector<double>& round_column(const std::string& name) const;
};

inline constexpr std::size_t kFigureGridPoints = 1001;

/// Tabulates one preset figure (1..8) on the scenario's base model.
/// Throws std::invalid_argument for an unknown figure id.
FigureTable emit_figure_data(int figure_id, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Output

using Cell = std::variant<double, std::int64_t, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

/// RFC 4180 style, LF line endings, doubles with 17 significant digits.
std::string to_csv(const CsvTable& table);
/// Pretty-printed JSON whose doubles carry 17 significant digits; non-finite values become null.
std::string to_json_text(const nlohmann::json& value);

CsvTable figure_grid_csv(const FigureTable& table);
CsvTable figure_rounds_csv(const FigureTable& table);
CsvTable trajectory_csv(std::span<const RoundSummary> summaries);
CsvTable rates_csv(const std::vector<std::pair<std::string, ErrorRates>>& named_rates);

nlohmann::json to_json(const ErrorRates& rates);

struct OutputBundle {
    std::map<std::string, CsvTable> csv;         ///< file name -> table
    std::map<std::string, nlohmann::json> json;  ///< file name -> document
    std::map<std::string, std::string> text;     ///< written regardless of format
};

struct ManifestEntry {
    std::string file;
    std::string sha256;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes);

inline constexpr const char* kManifestName = "manifest.json";

/// Writes the bundle (CSV tables when "csv" is requested, JSON documents
/// when "json" is) plus manifest.json into `directory`. On failure every
/// file written by this call is removed and OutputError names the path.
std::vector<ManifestEntry> write_outputs(const OutputBundle& bundle, const std::filesystem::path& directory,
                                         const std::vector<std::string>& formats);

}  // namespace humble
