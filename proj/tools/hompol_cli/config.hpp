#pragma once

// Strict JSON run configuration. Every object is read through a KeyReader
// that records the keys it consumed; leftovers are reported as errors.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hompol/experiment.hpp"

namespace hompol::cli {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Missing input files and unwritable outputs.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class KeyReader {
  public:
    KeyReader(const nlohmann::json &object, std::string path);

    [[nodiscard]] bool has(const std::string &key) const;
    [[nodiscard]] const nlohmann::json &at(const std::string &key);
    [[nodiscard]] double number(const std::string &key);
    [[nodiscard]] double number_or(const std::string &key, double fallback);
    [[nodiscard]] bool boolean_or(const std::string &key, bool fallback);
    [[nodiscard]] std::int64_t integer(const std::string &key);
    [[nodiscard]] std::int64_t integer_or(const std::string &key, std::int64_t fallback);
    [[nodiscard]] std::uint64_t seed(const std::string &key);
    [[nodiscard]] std::string string(const std::string &key);
    [[nodiscard]] KeyReader object(const std::string &key);
    [[nodiscard]] std::string key_path(const std::string &key) const;

    /// Throws if the object holds keys that were never read.
    void finish() const;

  private:
    const nlohmann::json *object_;
    std::string path_;
    std::set<std::string> used_;
};

/// {"start", "stop", "count"} or {"values": [...]}; strictly increasing.
std::vector<double> read_grid(KeyReader &parent, const std::string &key,
                              std::optional<std::vector<double>> fallback = std::nullopt);

std::vector<double> linspace(double start, double stop, std::int64_t count);

/// Pair description without a path difference (that comes from a grid).
struct SpectrumConfig {
    double lambda0_nm;
    double delta_lambda_nm;
    double l_c_um;
};

SpectrumConfig read_spectrum(KeyReader &parent, const std::string &key);

struct ProbmapConfig {
    SpectrumConfig lab;
    std::vector<double> phi_rad;
    std::vector<double> delta_z_um;
    std::vector<double> cuts_delta_z_um;
};

struct FisherScanConfig {
    SpectrumConfig lab;
    std::vector<double> phi_rad;
    std::vector<double> delta_z_um;
    std::vector<double> cuts_delta_z_um;
};

struct HomDipConfig {
    std::optional<std::filesystem::path> input; ///< measured dip CSV
    std::optional<HomDipModel> truth;           ///< simulate when no input
    std::vector<double> delta_z_um;
    std::int64_t pairs_per_point = 0;
    std::uint64_t seed = 0;
    double l_c_guess_um = 0.0;
};

struct SimulateConfig {
    ModelParameters model;
    std::vector<double> theta_rad;
    double mean_events_per_setting = 0.0;
    std::uint64_t seed = 0;
    std::optional<Acquisition> acquisition;
};

struct FitCommandConfig {
    std::filesystem::path data;
    FitConfig fit;
};

struct McBandConfig {
    std::filesystem::path data;
    FitConfig fit;
    int n_resamples = 0;
    std::vector<double> phi_rad;
    std::uint64_t seed = 0;
};

/// Reads and parses a JSON file; parse errors carry line and column.
nlohmann::json load_json(const std::filesystem::path &path);

// Each parser fills defaults, applies `seed_override` where the command
// has a seed, and writes the resolved configuration back into `resolved`.
// Relative data paths are taken relative to `base_dir`.
ProbmapConfig parse_probmap(const nlohmann::json &j, nlohmann::json &resolved);
FisherScanConfig parse_fisher_scan(const nlohmann::json &j, nlohmann::json &resolved);
HomDipConfig parse_hom_dip(const nlohmann::json &j, std::optional<std::uint64_t> seed_override,
                           const std::filesystem::path &base_dir, nlohmann::json &resolved);
SimulateConfig parse_simulate(const nlohmann::json &j,
                              std::optional<std::uint64_t> seed_override,
                              nlohmann::json &resolved);
FitCommandConfig parse_fit(const nlohmann::json &j, const std::filesystem::path &base_dir,
                           nlohmann::json &resolved);
McBandConfig parse_mc_band(const nlohmann::json &j, std::optional<std::uint64_t> seed_override,
                           const std::filesystem::path &base_dir, nlohmann::json &resolved);

} // namespace hompol::cli
