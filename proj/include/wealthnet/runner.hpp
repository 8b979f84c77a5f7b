#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wealthnet/correlations.hpp"
#include "wealthnet/dynamics.hpp"
#include "wealthnet/graph.hpp"

namespace wealthnet {

inline constexpr int kConfigVersion = 1;

/// Flat experiment description shared by every subcommand. Topology fields
/// not used by the chosen family are ignored.
struct ExperimentConfig {
    std::string topology = "complete";
    std::size_t n = 1000;
    std::size_t m_core = 0;
    double p_core = 0.5;
    double p_link = 0.01;
    std::size_t q = 2;
    double p_rewire = 0.1;
    std::size_t m0 = 2;
    std::size_t m = 2;

    BmParams dynamics;
    /// Total steps, burn-in included.
    std::uint64_t steps = 300000;
    std::uint64_t burn_in = 200000;
    std::uint64_t snapshot_every = 10000;
    std::size_t ensemble = 10;
    std::uint64_t seed = 1;
    std::vector<double> m_over_n;
    std::string out = "out";
    /// Execution detail; not part of the resolved config.
    unsigned threads = 1;

    void validate() const;
    TopologySpec topology_spec(std::uint64_t topology_seed) const;
};

/// Known presets: fig2, fig4, fig5.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const ExperimentConfig& config);
/// Applies the keys present in `j` on top of `base`. Unknown keys, a missing
/// or unsupported `version`, and mistyped values are parameter errors.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Ensemble member `run` of a config: its network and its noise seed.
struct RunSetup {
    Network net;
    std::uint64_t noise_seed;
};
RunSetup prepare_run(const ExperimentConfig& config, std::uint64_t run);

struct NetSummary {
    std::size_t n;
    std::size_t edges;
    std::uint32_t k_min;
    std::uint32_t k_max;
    double k_mean;
};
NetSummary summarize_network(const Network& net);

NetSummary cmd_net(const ExperimentConfig& config, const std::filesystem::path& out_path);

struct StationarityCheck {
    /// Two-sample KS between the first and second half of the snapshot times.
    std::optional<double> ks;
    bool passed;
};

inline constexpr double kStationarityKs = 0.05;

struct SimulateSummary {
    std::size_t runs;
    std::size_t pooled_samples;
    StationarityCheck stationarity;
    /// Set when the pooled samples could not be fitted.
    std::optional<std::string> fit_error;
};

/// Writes config.resolved.json, snapshots/run_NNN.csv and
/// snapshots/run_NNN.final.json per run, pool_w_norm.txt, a fit of the pool
/// under fits/, summary.json and, for core families, correlations.csv of
/// the final states.
SimulateSummary cmd_simulate(const ExperimentConfig& config);

enum class FitMode { pareto, gibrat, mixture, auto_ };
FitMode parse_fit_mode(const std::string& s);

struct FitRequest {
    std::filesystem::path samples;
    /// CSV column to read; empty reads one value per line.
    std::string column;
    FitMode mode = FitMode::auto_;
    std::optional<double> w_min;
    std::optional<double> upper_cut;
    std::optional<double> core_fraction;
    std::filesystem::path out_dir;
};

/// Reads positive samples from a one-per-line file or a CSV column.
std::vector<double> read_samples(const std::filesystem::path& path, const std::string& column = {});

/// Writes fit.json and eccdf.csv into out_dir and returns the report.
nlohmann::json cmd_fit(const FitRequest& request);

/// Writes config.resolved.json, correlations.csv and correlations_se.csv.
std::vector<CorrelationReport> cmd_sweep_correlations(const ExperimentConfig& config);

/// fig2 and fig4 simulate every M/N value into out/m_over_n_<r>/; fig5 runs
/// the correlation sweep.
void cmd_figure(const std::string& name, const ExperimentConfig& config);

}  // namespace wealthnet
