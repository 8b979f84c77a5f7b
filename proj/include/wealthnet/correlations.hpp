#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wealthnet/dynamics.hpp"
#include "wealthnet/graph.hpp"

namespace wealthnet {

/// Pearson correlation; nullopt when either variance is zero.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of vertex values at the two ends of every edge, each
/// edge counted in both orientations. Throws InsufficientDataError without
/// edges; nullopt when the end values do not vary.
std::optional<double> edge_end_pearson(const Network& net, std::span<const double> values);

/// Degree assortativity.
std::optional<double> r_degree(const Network& net);
/// Wealth assortativity on normalized wealth.
std::optional<double> r_wealth(const Network& net, const WealthState& state);
/// Vertex-level correlation between degree and normalized wealth.
std::optional<double> r_degree_wealth(const Network& net, const WealthState& state);

enum class SweepFamily { octopus, mixed };

struct SweepConfig {
    SweepFamily family = SweepFamily::octopus;
    std::size_t n = 3000;
    std::vector<double> m_over_n;
    double p_core = 0.5;
    BmParams dynamics;
    /// Steps simulated before the state is measured.
    std::uint64_t steps = 200000;
    std::size_t ensemble = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
    /// Core size for a sweep value, round(n * m_over_n).
    std::size_t core_size(double m_over_n) const;
};

struct Estimate {
    std::optional<double> mean;
    /// Standard error of the mean; needs two defined runs.
    std::optional<double> se;
    /// Runs in which the coefficient was defined.
    std::size_t defined = 0;
};

struct CorrelationReport {
    double m_over_n;
    Estimate r_degree;
    Estimate r_wealth;
    Estimate r_degree_wealth;
    std::size_t n_runs;
};

Estimate summarize(std::span<const std::optional<double>> values);

/// Topology seed and noise seed of ensemble member `run`.
struct RunSeeds {
    std::uint64_t topology;
    std::uint64_t noise;
};
RunSeeds run_seeds(std::uint64_t master, std::uint64_t run) noexcept;

/// Builds the network, simulates each ensemble member from uniform wealth
/// and averages the three coefficients of the final states.
std::vector<CorrelationReport> correlation_sweep(const SweepConfig& config);

/// `m_over_n,r_degree,r_wealth,r_degree_wealth,n_runs`, NA when undefined.
void write_correlations_csv(std::ostream& out, std::span<const CorrelationReport> reports);
/// Standard errors and defined-run counts for the same rows.
void write_correlation_errors_csv(std::ostream& out, std::span<const CorrelationReport> reports);

}  // namespace wealthnet
