#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wealthnet/graph.hpp"

namespace wealthnet {

/// How the pairwise exchange rates J_ij are derived from the adjacency.
enum class Coupling {
    /// J_ij = (J / N) a_ji
    uniform_over_n,
    /// J_ij = J a_ji / k_i, with k_i the degree of the receiving vertex;
    /// isolated vertices receive nothing.
    degree_normalized,
};

/// Parameters of the coupled multiplicative-noise exchange process
///   dw_i/dt = eta_i w_i + sum_j J_ij w_j - sum_j J_ji w_i
/// with eta_i Gaussian of mean `drift` and variance 2 sigma2 per unit time,
/// read in the Stratonovich sense.
struct BmParams {
    double drift = 1.0;
    double sigma2 = 0.05;
    double J = 0.05;
    Coupling coupling = Coupling::uniform_over_n;
    double dt = 0.01;

    void validate() const;
};

/// Wealth vector and model time. Stored values are expressed in a money
/// unit of 2^log2_unit; `simulate` shifts the unit by powers of two to keep
/// the stored mean near one, which is exact in floating point and leaves
/// normalized wealth untouched.
struct WealthState {
    std::vector<double> w;
    std::uint64_t step = 0;
    double t = 0.0;
    std::int64_t log2_unit = 0;

    static WealthState uniform(std::size_t n, double value = 1.0);

    double mean() const;
    /// w_i / <w>.
    std::vector<double> normalized() const;
};

/// Exchange sub-operator. Neighbour sums are accumulated either over the
/// adjacency list or, for vertices adjacent to most of their component,
/// as the component total minus the (shorter) list of non-neighbours.
class ExchangeOperator {
public:
    enum class Accumulation { automatic, neighbor_list };

    ExchangeOperator(const Network& net, const BmParams& params,
                     Accumulation accumulation = Accumulation::automatic);

    /// Exchange drift: out[i] = sum_j J_ij w_j - (sum_j J_ji) w_i.
    void rate(std::span<const double> w, std::span<double> out) const;
    /// Explicit Euler exchange sub-step, in place.
    void apply(std::span<double> w, double dt) const;

    /// Largest per-vertex outflow rate sum_j J_ji; positivity of `apply`
    /// requires dt * max_outflow_rate() < 1.
    double max_outflow_rate() const noexcept { return max_out_; }

private:
    void neighbor_sums(std::span<const double> w, std::span<double> sums) const;

    const Network* net_;
    std::vector<double> in_coef_;
    std::vector<double> out_rate_;
    std::vector<std::uint8_t> use_complement_;
    std::vector<std::size_t> complement_offsets_;
    std::vector<Vertex> complement_;
    double max_out_ = 0.0;
    bool any_complement_ = false;
    mutable std::vector<double> component_sum_;
    mutable std::vector<double> scratch_;
};

enum class Scheme {
    /// Exact geometric half-step, Euler exchange, exact geometric half-step.
    split,
    /// Stratonovich Euler-Heun predictor-corrector on the full equation.
    heun,
};

/// Noise-field tags passed to vertex_normals.
inline constexpr std::uint32_t kSplitNoise = 0;
inline constexpr std::uint32_t kHeunNoise = 1;

/// Stateful stepper reusing the exchange operator and scratch buffers.
class Integrator {
public:
    Integrator(const Network& net, const BmParams& params, std::uint64_t noise_seed,
               Scheme scheme = Scheme::split,
               ExchangeOperator::Accumulation accumulation =
                   ExchangeOperator::Accumulation::automatic);

    /// Advances one step in place. Throws NumericalError carrying the index
    /// of the failing step.
    void advance(WealthState& state);

    const ExchangeOperator& exchange() const noexcept { return exchange_; }

private:
    void advance_split(WealthState& state);
    void advance_heun(WealthState& state);
    void check(const WealthState& state) const;

    const Network* net_;
    BmParams params_;
    std::uint64_t seed_;
    Scheme scheme_;
    ExchangeOperator exchange_;
    std::vector<double> a_, b_, c_, dw_;
};

WealthState step_split(const WealthState& state, const Network& net, const BmParams& params,
                       std::uint64_t noise_seed);
WealthState step_heun(const WealthState& state, const Network& net, const BmParams& params,
                      std::uint64_t noise_seed);

/// Shifts the money unit by a power of two when the stored mean drifts
/// outside [2^-64, 2^64]. Returns true if a shift happened.
bool rebase_unit(WealthState& state);

struct Snapshot {
    std::uint64_t step;
    double t;
    std::int64_t log2_unit;
    std::vector<double> w;
    std::vector<double> w_norm;
};

struct SimulationOptions {
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
    /// 0 disables snapshots; otherwise one snapshot every `snapshot_every`
    /// steps after burn-in.
    std::uint64_t snapshot_every = 0;
    std::uint64_t seed = 0;
    /// Empty means uniform initial wealth 1.
    std::vector<double> initial;
    Scheme scheme = Scheme::split;
};

struct SimulationResult {
    WealthState final_state;
    std::vector<Snapshot> snapshots;
};

SimulationResult simulate(const Network& net, const BmParams& params,
                          const SimulationOptions& options);

/// CSV with header `t,vertex,w,w_norm`, time-major then vertex ascending.
/// `w` is reported in the snapshot's money unit.
void write_snapshots_csv(std::ostream& out, std::span<const Snapshot> snapshots);

/// Single-agent reference processes. eta = exp(log_mean + log_sd * Z).
struct AdditiveNoise {
    double mean;
    double sd;
};

struct NoiseSpec {
    double log_mean;
    double log_sd;
    std::optional<AdditiveNoise> additive;
    std::optional<double> floor;
    double initial = 1.0;

    void validate() const;
};

/// w(t+1) = max(eta(t) w(t), floor). Returns the path w(0..steps).
std::vector<double> multiplicative_reference(const NoiseSpec& noise, std::size_t steps,
                                             std::uint64_t seed);

/// w(t+1) = eta(t) w(t) + xi(t), floored when a floor is set. eta and xi use
/// separate streams of the seed, so xi == 0 reproduces the multiplicative
/// path exactly. Requires <log eta> < 0.
std::vector<double> additive_reference(const NoiseSpec& noise, std::size_t steps,
                                       std::uint64_t seed);

/// Positive root of <eta^alpha> = 1, found numerically with the moment
/// evaluated by quadrature over the Gaussian law of log eta.
double pareto_index_condition(const NoiseSpec& noise);

/// Closed form of the same root for log-normal eta: -2 mu / s^2.
double lognormal_pareto_index(double log_mean, double log_sd);

}  // namespace wealthnet
