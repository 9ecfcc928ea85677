#pragma once

// Experiment configuration: an INI file with the sections grid, fixture,
// lagrangian, geodesic, verification and output. Parsing is total: unknown
// sections or keys, malformed values and out-of-range numbers all raise
// ConfigError naming the offending field.

#include "mal/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mal::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// One endpoint preset: constant + sum of trig_field modes.
struct EndpointConfig {
    double constant = 0.0;
    std::vector<double> amplitudes;
};

struct ExperimentConfig {
    struct {
        int n = 32;
        DerivativeScheme scheme = DerivativeScheme::spectral;
    } grid;
    struct {
        /// "constants" (amplitudes must be empty) or "trig".
        std::string kind = "trig";
        EndpointConfig a{0.0, {0.01, 0.005, 0.0025}};
        EndpointConfig b{0.5, {-0.005, 0.01, 0.0, 0.005}};
        /// Second pair for action convexity; empty means the reversed first pair.
        bool has_second_pair = false;
        EndpointConfig c;
        EndpointConfig d;
    } fixture;
    struct {
        std::vector<std::string> specs{"power:p1"};
    } lagrangian;
    struct {
        double T = 1.0;
        int time_steps = 32;
        /// "fixed": solve at every epsilon of the schedule with warm starts.
        /// "weak": eps -> 0 continuation starting at the first entry.
        std::string mode = "fixed";
        std::vector<double> epsilon_schedule{0.1};
        double weak_tol = 1e-5;
        double max_final_epsilon = 1e-4;
        double solver_tol = 1e-8;
        int max_iter = 50;
    } geodesic;
    struct {
        std::vector<std::string> suites;
        std::uint64_t seed = 7;
        int count = 100;
        double tolerance = 5e-3;
        int knot_budget = 3;
        double competitor_amplitude = 0.05;
        double jacobi_delta = 3e-4;
        double jacobi_tolerance = 1e-4;
        double jacobi_epsilon = 0.1;
        double triangle_epsilon = 1e-3;
        double S = 1.0;
        int convexity_spacing = 0;
        std::vector<int> convexity_centers;
        int sequence_length = 8;
    } verification;
    struct {
        std::string directory = "out";
        std::vector<std::string> formats{"csv", "json"};
    } output;

    /// Re-checks every field; throws ConfigError.
    void validate() const;
};

/// Names accepted in verification.suites and by --suite.
const std::vector<std::string>& known_suites();

ExperimentConfig parse_config(const std::filesystem::path& file);
ExperimentConfig parse_config_text(const std::string& text);

/// Sorted section.key=value lines with doubles at 17 significant digits.
std::string canonical_text(const ExperimentConfig& config);
/// Lower-case hex SHA-256 of canonical_text.
std::string config_hash(const ExperimentConfig& config);

/// Comma-separated list, items trimmed, empty items rejected.
std::vector<std::string> split_list(const std::string& text, const std::string& field);

}  // namespace mal::cli
