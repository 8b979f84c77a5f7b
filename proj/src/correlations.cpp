#include "wealthnet/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "format.hpp"
#include "wealthnet/errors.hpp"
#include "wealthnet/parallel.hpp"
#include "wealthnet/rng.hpp"

namespace wealthnet {

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

std::optional<double> clamp_unit(double r) {
    if (!std::isfinite(r)) throw DomainError("correlation: non-finite input values");
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ParameterError("pearson: size mismatch");
    if (x.size() < 2) throw InsufficientDataError("pearson: need two observations");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return clamp_unit(sxy / (std::sqrt(sxx) * std::sqrt(syy)));
}

std::optional<double> edge_end_pearson(const Network& net, std::span<const double> values) {
    if (values.size() != net.vertex_count()) {
        throw ParameterError("edge_end_pearson: " + std::to_string(values.size()) +
                             " values for " + std::to_string(net.vertex_count()) + " vertices");
    }
    if (net.edge_count() == 0) throw InsufficientDataError("edge_end_pearson: network has no edges");
    // With both orientations the two end marginals coincide, so one mean and
    // one variance serve both sides.
    double sum = 0.0;
    for (const auto& e : net.edges()) sum += values[e.u] + values[e.v];
    const double mean = sum / (2.0 * static_cast<double>(net.edge_count()));
    double var = 0.0, cov = 0.0;
    for (const auto& e : net.edges()) {
        const double a = values[e.u] - mean;
        const double b = values[e.v] - mean;
        var += a * a + b * b;
        cov += 2.0 * a * b;
    }
    if (!(var > 0.0)) return std::nullopt;
    return clamp_unit(cov / var);
}

std::optional<double> r_degree(const Network& net) {
    std::vector<double> k(net.degrees().begin(), net.degrees().end());
    return edge_end_pearson(net, k);
}

std::optional<double> r_wealth(const Network& net, const WealthState& state) {
    return edge_end_pearson(net, state.normalized());
}

std::optional<double> r_degree_wealth(const Network& net, const WealthState& state) {
    if (state.w.size() != net.vertex_count()) throw ParameterError("r_degree_wealth: size mismatch");
    std::vector<double> k(net.degrees().begin(), net.degrees().end());
    return pearson(k, state.normalized());
}

void SweepConfig::validate() const {
    if (n < 2) throw ParameterError("sweep: n must be at least 2");
    if (m_over_n.empty()) throw ParameterError("sweep: m_over_n list is empty");
    if (ensemble < 1) throw ParameterError("sweep: ensemble must be at least 1");
    if (family == SweepFamily::octopus && !(p_core >= 0.0 && p_core <= 1.0)) {
        throw ParameterError("sweep: p_core must lie in [0,1]");
    }
    dynamics.validate();
    for (double r : m_over_n) {
        if (!(r > 0.0 && r <= 1.0)) throw ParameterError("sweep: m_over_n must lie in (0,1]");
        const std::size_t m = core_size(r);
        if (m < 2) {
            throw ParameterError("sweep: m_over_n=" + std::to_string(r) + " gives a core of " +
                                 std::to_string(m) + " vertices, need at least 2");
        }
    }
}

std::size_t SweepConfig::core_size(double m_over_n_value) const {
    return static_cast<std::size_t>(std::lround(static_cast<double>(n) * m_over_n_value));
}

Estimate summarize(std::span<const std::optional<double>> values) {
    std::vector<double> x;
    for (const auto& v : values) {
        if (v) x.push_back(*v);
    }
    Estimate e;
    e.defined = x.size();
    if (x.empty()) return e;
    const double m = mean_of(x);
    e.mean = m;
    if (x.size() >= 2) {
        double ss = 0.0;
        for (double v : x) ss += (v - m) * (v - m);
        e.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
    }
    return e;
}

RunSeeds run_seeds(std::uint64_t master, std::uint64_t run) noexcept {
    const std::uint64_t s = derive_seed(master, run);
    return {derive_seed(s, 0), derive_seed(s, 1)};
}

std::vector<CorrelationReport> correlation_sweep(const SweepConfig& config) {
    config.validate();
    struct Cell {
        std::optional<double> degree, wealth, degree_wealth;
    };
    std::vector<CorrelationReport> reports;
    for (double ratio : config.m_over_n) {
        const std::size_t m_core = config.core_size(ratio);
        std::vector<Cell> cells(config.ensemble);
        parallel_for(config.ensemble, config.threads, [&](std::size_t r) {
            const RunSeeds seeds = run_seeds(config.seed, r);
            const Network net = config.family == SweepFamily::octopus
                                    ? octopus(config.n, m_core, config.p_core, seeds.topology)
                                    : mixed_core(config.n, m_core);
            SimulationOptions options;
            options.steps = config.steps;
            options.seed = seeds.noise;
            const WealthState state = simulate(net, config.dynamics, options).final_state;
            cells[r] = {r_degree(net), r_wealth(net, state), r_degree_wealth(net, state)};
        });
        std::vector<std::optional<double>> d, w, dw;
        for (const auto& c : cells) {
            d.push_back(c.degree);
            w.push_back(c.wealth);
            dw.push_back(c.degree_wealth);
        }
        reports.push_back({ratio, summarize(d), summarize(w), summarize(dw), config.ensemble});
    }
    return reports;
}

namespace {

void put_optional(std::ostream& out, const std::optional<double>& x) {
    if (x) detail::put_double(out, *x);
    else out << "NA";
}

}  // namespace

void write_correlations_csv(std::ostream& out, std::span<const CorrelationReport> reports) {
    out << "m_over_n,r_degree,r_wealth,r_degree_wealth,n_runs\n";
    for (const auto& r : reports) {
        detail::put_double(out, r.m_over_n);
        out << ',';
        put_optional(out, r.r_degree.mean);
        out << ',';
        put_optional(out, r.r_wealth.mean);
        out << ',';
        put_optional(out, r.r_degree_wealth.mean);
        out << ',' << r.n_runs << '\n';
    }
}

void write_correlation_errors_csv(std::ostream& out, std::span<const CorrelationReport> reports) {
    out << "m_over_n,se_r_degree,se_r_wealth,se_r_degree_wealth,"
           "defined_r_degree,defined_r_wealth,defined_r_degree_wealth\n";
    for (const auto& r : reports) {
        detail::put_double(out, r.m_over_n);
        for (const Estimate* e : {&r.r_degree, &r.r_wealth, &r.r_degree_wealth}) {
            out << ',';
            put_optional(out, e->se);
        }
        out << ',' << r.r_degree.defined << ',' << r.r_wealth.defined << ','
            << r.r_degree_wealth.defined << '\n';
    }
}

}  // namespace wealthnet
