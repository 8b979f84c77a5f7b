#include "wealthnet/dynamics.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "wealthnet/analytic.hpp"
#include "wealthnet/errors.hpp"
#include "wealthnet/rng.hpp"
#include "format.hpp"

namespace wealthnet {

void BmParams::validate() const {
    if (!std::isfinite(drift)) throw ParameterError("dynamics: drift must be finite");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
        throw ParameterError("dynamics: sigma2 must be nonnegative");
    }
    if (!(J >= 0.0) || !std::isfinite(J)) throw ParameterError("dynamics: J must be nonnegative");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dynamics: dt must be positive");
}

WealthState WealthState::uniform(std::size_t n, double value) {
    WealthState s;
    s.w.assign(n, value);
    return s;
}

double WealthState::mean() const {
    return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

std::vector<double> WealthState::normalized() const {
    const double m = mean();
    std::vector<double> out(w.size());
    std::transform(w.begin(), w.end(), out.begin(), [m](double x) { return x / m; });
    return out;
}

// --- exchange -------------------------------------------------------------

ExchangeOperator::ExchangeOperator(const Network& net, const BmParams& params,
                                   Accumulation accumulation)
    : net_(&net) {
    params.validate();
    const std::size_t n = net.vertex_count();
    const double N = static_cast<double>(n);
    in_coef_.assign(n, 0.0);
    out_rate_.assign(n, 0.0);
    for (Vertex i = 0; i < n; ++i) {
        const double k = net.degree(i);
        if (k == 0) continue;
        if (params.coupling == Coupling::uniform_over_n) {
            in_coef_[i] = params.J / N;
            out_rate_[i] = params.J * k / N;
        } else {
            in_coef_[i] = params.J / k;
            double out = 0.0;
            for (Vertex j : net.neighbors(i)) out += 1.0 / net.degree(j);
            out_rate_[i] = params.J * out;
        }
    }
    max_out_ = out_rate_.empty() ? 0.0 : *std::max_element(out_rate_.begin(), out_rate_.end());

    use_complement_.assign(n, 0);
    complement_offsets_.assign(n + 1, 0);
    if (accumulation == Accumulation::automatic) {
        // Members of each component, for enumerating non-neighbours.
        std::vector<std::size_t> member_offsets(net.component_count() + 1, 0);
        for (Vertex i = 0; i < n; ++i) ++member_offsets[net.component_of(i) + 1];
        std::partial_sum(member_offsets.begin(), member_offsets.end(), member_offsets.begin());
        std::vector<Vertex> members(n);
        {
            std::vector<std::size_t> cursor(member_offsets.begin(), member_offsets.end() - 1);
            for (Vertex i = 0; i < n; ++i) members[cursor[net.component_of(i)]++] = i;
        }
        std::vector<std::uint8_t> is_neighbor(n, 0);
        for (Vertex i = 0; i < n; ++i) {
            const auto c = net.component_of(i);
            const std::size_t size = net.component_size(c);
            const std::size_t k = net.degree(i);
            if (k == 0 || size - 1 - k >= k) {
                complement_offsets_[i + 1] = complement_offsets_[i];
                continue;
            }
            use_complement_[i] = 1;
            any_complement_ = true;
            for (Vertex j : net.neighbors(i)) is_neighbor[j] = 1;
            for (std::size_t m = member_offsets[c]; m < member_offsets[c + 1]; ++m) {
                const Vertex j = members[m];
                if (j != i && !is_neighbor[j]) complement_.push_back(j);
            }
            for (Vertex j : net.neighbors(i)) is_neighbor[j] = 0;
            complement_offsets_[i + 1] = complement_.size();
        }
    }
    component_sum_.assign(net.component_count(), 0.0);
    scratch_.assign(n, 0.0);
}

void ExchangeOperator::neighbor_sums(std::span<const double> w, std::span<double> sums) const {
    const Network& net = *net_;
    const std::size_t n = net.vertex_count();
    if (any_complement_) {
        std::fill(component_sum_.begin(), component_sum_.end(), 0.0);
        for (Vertex i = 0; i < n; ++i) component_sum_[net.component_of(i)] += w[i];
    }
    for (Vertex i = 0; i < n; ++i) {
        double s = 0.0;
        if (use_complement_[i]) {
            double missing = 0.0;
            for (std::size_t p = complement_offsets_[i]; p < complement_offsets_[i + 1]; ++p) {
                missing += w[complement_[p]];
            }
            s = component_sum_[net.component_of(i)] - w[i] - missing;
        } else {
            for (Vertex j : net.neighbors(i)) s += w[j];
        }
        sums[i] = s;
    }
}

void ExchangeOperator::rate(std::span<const double> w, std::span<double> out) const {
    neighbor_sums(w, scratch_);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = in_coef_[i] * scratch_[i] - out_rate_[i] * w[i];
}

void ExchangeOperator::apply(std::span<double> w, double dt) const {
    neighbor_sums(w, scratch_);
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] += dt * (in_coef_[i] * scratch_[i] - out_rate_[i] * w[i]);
    }
}

// --- integration ----------------------------------------------------------

Integrator::Integrator(const Network& net, const BmParams& params, std::uint64_t noise_seed,
                       Scheme scheme, ExchangeOperator::Accumulation accumulation)
    : net_(&net),
      params_(params),
      seed_(noise_seed),
      scheme_(scheme),
      exchange_(net, params, accumulation) {
    const std::size_t n = net.vertex_count();
    a_.assign(n, 0.0);
    b_.assign(n, 0.0);
    c_.assign(n, 0.0);
}

void Integrator::advance(WealthState& state) {
    if (state.w.size() != net_->vertex_count()) {
        throw ParameterError("dynamics: state has " + std::to_string(state.w.size()) +
                             " entries but the network has " +
                             std::to_string(net_->vertex_count()) + " vertices");
    }
    if (params_.dt * exchange_.max_outflow_rate() >= 1.0) {
        throw NumericalError("stability bound violated: dt * max outflow rate = " +
                                 std::to_string(params_.dt * exchange_.max_outflow_rate()) +
                                 " >= 1",
                             state.step + 1);
    }
    if (scheme_ == Scheme::split) advance_split(state);
    else advance_heun(state);
    ++state.step;
    state.t = static_cast<double>(state.step) * params_.dt;
    check(state);
}

void Integrator::advance_split(WealthState& state) {
    auto& w = state.w;
    const std::size_t n = w.size();
    const double half_drift = 0.5 * params_.drift * params_.dt;
    const double half_sd = std::sqrt(params_.sigma2 * params_.dt);
    for (Vertex i = 0; i < n; ++i) {
        const auto [z1, z2] = vertex_normals(seed_, i, state.step, kSplitNoise);
        w[i] *= std::exp(half_drift + half_sd * z1);
        b_[i] = z2;
    }
    if (params_.J > 0.0 && net_->edge_count() > 0) exchange_.apply(w, params_.dt);
    for (Vertex i = 0; i < n; ++i) w[i] *= std::exp(half_drift + half_sd * b_[i]);
}

void Integrator::advance_heun(WealthState& state) {
    auto& w = state.w;
    const std::size_t n = w.size();
    const double dt = params_.dt;
    const double m = params_.drift;
    const double diffusion = std::sqrt(2.0 * params_.sigma2);
    const double sqrt_dt = std::sqrt(dt);
    const bool coupled = params_.J > 0.0 && net_->edge_count() > 0;

    // a_: drift at w; c_: predictor; b_: drift at predictor.
    if (coupled) exchange_.rate(w, a_);
    else std::fill(a_.begin(), a_.end(), 0.0);
    if (dw_.size() != n) dw_.assign(n, 0.0);
    for (Vertex i = 0; i < n; ++i) {
        dw_[i] = sqrt_dt * vertex_normals(seed_, i, state.step, kHeunNoise).first;
        a_[i] += m * w[i];
        c_[i] = w[i] + dt * a_[i] + diffusion * w[i] * dw_[i];
    }
    if (coupled) exchange_.rate(c_, b_);
    else std::fill(b_.begin(), b_.end(), 0.0);
    for (Vertex i = 0; i < n; ++i) {
        b_[i] += m * c_[i];
        w[i] += 0.5 * dt * (a_[i] + b_[i]) + 0.5 * diffusion * (w[i] + c_[i]) * dw_[i];
    }
}

void Integrator::check(const WealthState& state) const {
    for (std::size_t i = 0; i < state.w.size(); ++i) {
        const double x = state.w[i];
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw NumericalError("wealth of vertex " + std::to_string(i) +
                                     " became non-positive or non-finite",
                                 state.step);
        }
    }
}

WealthState step_split(const WealthState& state, const Network& net, const BmParams& params,
                       std::uint64_t noise_seed) {
    Integrator integrator(net, params, noise_seed, Scheme::split);
    WealthState next = state;
    integrator.advance(next);
    return next;
}

WealthState step_heun(const WealthState& state, const Network& net, const BmParams& params,
                      std::uint64_t noise_seed) {
    Integrator integrator(net, params, noise_seed, Scheme::heun);
    WealthState next = state;
    integrator.advance(next);
    return next;
}

bool rebase_unit(WealthState& state) {
    constexpr int kMaxExponent = 64;
    int e = 0;
    std::frexp(state.mean(), &e);
    if (e <= kMaxExponent && e >= -kMaxExponent) return false;
    for (auto& x : state.w) x = std::ldexp(x, -e);
    state.log2_unit += e;
    return true;
}

SimulationResult simulate(const Network& net, const BmParams& params,
                          const SimulationOptions& options) {
    params.validate();
    if (options.burn_in > options.steps) {
        throw ParameterError("simulate: requires steps >= burn_in (steps=" +
                             std::to_string(options.steps) +
                             ", burn_in=" + std::to_string(options.burn_in) + ")");
    }
    const std::size_t n = net.vertex_count();
    SimulationResult result;
    WealthState& state = result.final_state;
    if (options.initial.empty()) {
        state = WealthState::uniform(n);
    } else {
        if (options.initial.size() != n) {
            throw ParameterError("simulate: initial wealth has " +
                                 std::to_string(options.initial.size()) + " entries, expected " +
                                 std::to_string(n));
        }
        for (double x : options.initial) {
            if (!(x > 0.0) || !std::isfinite(x)) {
                throw ParameterError("simulate: initial wealth must be positive and finite");
            }
        }
        state.w = options.initial;
    }

    Integrator integrator(net, params, options.seed, options.scheme);
    for (std::uint64_t s = 1; s <= options.steps; ++s) {
        integrator.advance(state);
        rebase_unit(state);
        if (options.snapshot_every > 0 && s > options.burn_in &&
            (s - options.burn_in) % options.snapshot_every == 0) {
            result.snapshots.push_back(
                {state.step, state.t, state.log2_unit, state.w, state.normalized()});
        }
    }
    return result;
}

void write_snapshots_csv(std::ostream& out, std::span<const Snapshot> snapshots) {
    using detail::put_double;
    out << "t,vertex,w,w_norm\n";
    for (const auto& snap : snapshots) {
        for (std::size_t i = 0; i < snap.w.size(); ++i) {
            put_double(out, snap.t);
            out << ',' << i << ',';
            put_double(out, snap.w[i]);
            out << ',';
            put_double(out, snap.w_norm[i]);
            out << '\n';
        }
    }
}

// --- reference processes --------------------------------------------------

void NoiseSpec::validate() const {
    if (!std::isfinite(log_mean)) throw ParameterError("noise: log_mean must be finite");
    if (!(log_sd >= 0.0) || !std::isfinite(log_sd)) {
        throw ParameterError("noise: log_sd must be nonnegative");
    }
    if (floor && !(*floor > 0.0)) throw ParameterError("noise: floor must be positive");
    if (additive && !(additive->sd >= 0.0)) throw ParameterError("noise: additive sd must be nonnegative");
    if (!(initial > 0.0)) throw ParameterError("noise: initial wealth must be positive");
}

std::vector<double> multiplicative_reference(const NoiseSpec& noise, std::size_t steps,
                                             std::uint64_t seed) {
    noise.validate();
    if (noise.additive) {
        throw ParameterError("multiplicative_reference: noise carries an additive term");
    }
    Rng eta(seed, 0);
    std::vector<double> path(steps + 1);
    path[0] = noise.initial;
    for (std::size_t t = 0; t < steps; ++t) {
        double next = path[t] * std::exp(noise.log_mean + noise.log_sd * eta.normal());
        if (noise.floor) next = std::max(next, *noise.floor);
        path[t + 1] = next;
    }
    return path;
}

std::vector<double> additive_reference(const NoiseSpec& noise, std::size_t steps,
                                       std::uint64_t seed) {
    noise.validate();
    if (!(noise.log_mean < 0.0)) {
        throw ParameterError("additive_reference: requires <log eta> < 0 for a stationary law (got " +
                             std::to_string(noise.log_mean) + ")");
    }
    const AdditiveNoise xi_law = noise.additive.value_or(AdditiveNoise{0.0, 0.0});
    Rng eta(seed, 0);
    Rng xi(seed, 1);
    std::vector<double> path(steps + 1);
    path[0] = noise.initial;
    for (std::size_t t = 0; t < steps; ++t) {
        double next = path[t] * std::exp(noise.log_mean + noise.log_sd * eta.normal()) +
                      xi.normal(xi_law.mean, xi_law.sd);
        if (noise.floor) next = std::max(next, *noise.floor);
        path[t + 1] = next;
    }
    return path;
}

double lognormal_pareto_index(double log_mean, double log_sd) {
    if (!(log_mean < 0.0) || !(log_sd > 0.0)) {
        throw DomainError("pareto index: requires log_mean < 0 and log_sd > 0");
    }
    return -2.0 * log_mean / (log_sd * log_sd);
}

double pareto_index_condition(const NoiseSpec& noise) {
    noise.validate();
    if (!(noise.log_mean < 0.0) || !(noise.log_sd > 0.0)) {
        throw DomainError("pareto index: <eta^alpha> = 1 has no positive root unless "
                          "<log eta> < 0 and log eta has positive spread");
    }
    const double mu = noise.log_mean;
    const double s = noise.log_sd;
    // log <eta^a>, with the integrand centred on its peak mu + a s^2.
    auto log_moment = [mu, s](double a) {
        const double centre = mu + a * s * s;
        auto f = [=](double x) {
            const double z = (x - mu) / s;
            return std::exp(a * (x - centre) - 0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
        };
        const double width = 40.0 * s;
        const auto r = quadrature::integrate(f, centre - width, centre + width, 1e-14, 0.0);
        return a * centre + std::log(r.value);
    };

    double hi = 1.0;
    while (log_moment(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e12) throw DomainError("pareto index: root not bracketed");
    }
    double lo = hi / 2.0;
    while (log_moment(lo) >= 0.0) {
        lo /= 2.0;
        if (lo < 1e-300) throw DomainError("pareto index: root not bracketed");
    }
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        log_moment, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
    return 0.5 * (a + b);
}

}  // namespace wealthnet
