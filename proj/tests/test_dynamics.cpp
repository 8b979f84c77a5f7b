#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "wealthnet/dynamics.hpp"
#include "wealthnet/errors.hpp"
#include "wealthnet/rng.hpp"

using namespace wealthnet;
using Acc = ExchangeOperator::Accumulation;

namespace {

std::vector<double> random_wealth(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(n);
    for (auto& x : w) x = 0.1 + rng.uniform() * 3.0;
    return w;
}

NoiseSpec lognormal(double log_mean, double log_sd) {
    NoiseSpec n{};
    n.log_mean = log_mean;
    n.log_sd = log_sd;
    return n;
}

double sum(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

double mean_of(const std::vector<double>& x) { return sum(x) / static_cast<double>(x.size()); }

double variance_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((BmParams{1.0, -0.1, 0.1}).validate(), ParameterError);
    CHECK_THROWS_AS((BmParams{1.0, 0.1, -0.1}).validate(), ParameterError);
    BmParams p;
    p.dt = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p.dt = 0.01;
    p.drift = NAN;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    BmParams ok;
    ok.sigma2 = 0.0;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("uncoupled step is two exact geometric half-steps") {
    const auto net = erdos_renyi(50, 0.1, 3);
    BmParams p{0.7, 0.2, 0.0, Coupling::uniform_over_n, 0.01};
    WealthState s;
    s.w = random_wealth(50, 1);
    const auto next = step_split(s, net, p, 42);
    const double h = 0.5 * p.drift * p.dt;
    const double sd = std::sqrt(p.sigma2 * p.dt);
    for (Vertex i = 0; i < 50; ++i) {
        const auto [z1, z2] = vertex_normals(42, i, 0, kSplitNoise);
        double expect = s.w[i] * std::exp(h + sd * z1);
        expect *= std::exp(h + sd * z2);
        CHECK(next.w[i] == expect);
    }
    CHECK(next.step == 1);
    CHECK(next.t == p.dt);
}

TEST_CASE("exchange conserves total wealth") {
    for (auto coupling : {Coupling::uniform_over_n, Coupling::degree_normalized}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto net = build({topology::Octopus{120, 20, 0.4}, seed});
            BmParams p{0.0, 0.0, 0.8, coupling, 0.05};
            ExchangeOperator op(net, p);
            auto w = random_wealth(120, seed);
            const double before = sum(w);
            for (int k = 0; k < 100; ++k) op.apply(w, p.dt);
            CHECK(std::abs(sum(w) - before) < 1e-12 * before);
        }
    }
}

TEST_CASE("complete graph with uniform coupling relaxes to the mean") {
    const std::size_t n = 64;
    const auto net = complete_graph(n);
    BmParams p{0.0, 0.0, 0.3, Coupling::uniform_over_n, 0.01};
    ExchangeOperator op(net, p);
    auto w = random_wealth(n, 9);
    const double m = mean_of(w);
    std::vector<double> rate(n);
    op.rate(w, rate);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(rate[i] - p.J * (m - w[i])) < 1e-12);
}

TEST_CASE("complement accumulation matches adjacency lists") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        for (auto coupling : {Coupling::uniform_over_n, Coupling::degree_normalized}) {
            const auto net = build({topology::Octopus{80, 30, 0.9}, seed});
            BmParams p{0.0, 0.0, 0.5, coupling, 0.01};
            ExchangeOperator fast(net, p, Acc::automatic);
            ExchangeOperator plain(net, p, Acc::neighbor_list);
            const auto w = random_wealth(80, seed + 100);
            std::vector<double> a(80), b(80);
            fast.rate(w, a);
            plain.rate(w, b);
            for (std::size_t i = 0; i < 80; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
        }
    }
}

TEST_CASE("degree-normalized rates from the explicit matrix") {
    const auto net = build({topology::ErdosRenyi{25, 0.3}, 4});
    BmParams p{0.0, 0.0, 0.7, Coupling::degree_normalized, 0.01};
    ExchangeOperator op(net, p);
    const auto w = random_wealth(25, 5);
    std::vector<double> rate(25);
    op.rate(w, rate);
    for (Vertex i = 0; i < 25; ++i) {
        double expect = 0.0;
        for (Vertex j : net.neighbors(i)) {
            expect += p.J / net.degree(i) * w[j];
            expect -= p.J / net.degree(j) * w[i];
        }
        CHECK(std::abs(rate[i] - expect) < 1e-12);
    }
}

TEST_CASE("dynamics commute with power-of-two rescaling") {
    const auto net = build({topology::WattsStrogatz{60, 2, 0.2}, 1});
    BmParams p{1.0, 0.05, 0.3, Coupling::uniform_over_n, 0.01};
    SimulationOptions o;
    o.steps = 200;
    o.seed = 11;
    o.initial = random_wealth(60, 2);
    const auto a = simulate(net, p, o);
    for (auto& x : o.initial) x = std::ldexp(x, 10);
    const auto b = simulate(net, p, o);
    for (std::size_t i = 0; i < 60; ++i) {
        CHECK(std::ldexp(a.final_state.w[i], a.final_state.log2_unit + 10) ==
              std::ldexp(b.final_state.w[i], b.final_state.log2_unit));
    }
}

TEST_CASE("stability bound raises a numerical error") {
    const auto net = complete_graph(100);
    BmParams p{1.0, 0.05, 150.0, Coupling::uniform_over_n, 0.01};
    WealthState s = WealthState::uniform(100);
    CHECK_THROWS_AS(step_split(s, net, p, 1), NumericalError);
    p.J = 50.0;
    CHECK_NOTHROW(step_split(s, net, p, 1));
    BmParams star{1.0, 0.05, 50.0, Coupling::degree_normalized, 0.01};
    const auto hub = Network::from_edges(200, [] {
        std::vector<Edge> e;
        for (Vertex i = 1; i < 200; ++i) e.push_back({0, i});
        return e;
    }());
    CHECK_THROWS_AS(step_split(WealthState::uniform(200), hub, star, 1), NumericalError);
}

TEST_CASE("noiseless schemes reproduce exponential growth") {
    const auto single = Network::from_edges(1, {});
    BmParams p{1.0, 0.0, 0.0, Coupling::uniform_over_n, 1.0 / 50000};
    for (auto scheme : {Scheme::split, Scheme::heun}) {
        SimulationOptions o;
        o.steps = 50000;
        o.scheme = scheme;
        const auto r = simulate(single, p, o);
        const double w = std::ldexp(r.final_state.w[0], r.final_state.log2_unit);
        CHECK(std::abs(w / std::exp(1.0) - 1.0) < 1e-9);
    }
}

TEST_CASE("noiseless coupled flow converges to the closed form") {
    // Complete graph, uniform coupling: the mean grows as exp(m t) and the
    // deviations from it as exp((m - J) t).
    const std::size_t n = 30;
    const auto net = complete_graph(n);
    const auto w0 = random_wealth(n, 8);
    const double m0 = mean_of(w0);
    const double T = 2.0;
    const double m = 0.5, J = 1.5;
    auto error = [&](Scheme scheme, double dt) {
        BmParams p{m, 0.0, J, Coupling::uniform_over_n, dt};
        SimulationOptions o;
        o.steps = static_cast<std::uint64_t>(std::llround(T / dt));
        o.initial = w0;
        o.scheme = scheme;
        const auto r = simulate(net, p, o);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double exact = std::exp(m * T) * (m0 + (w0[i] - m0) * std::exp(-J * T));
            const double got = std::ldexp(r.final_state.w[i], r.final_state.log2_unit);
            e = std::max(e, std::abs(got - exact) / exact);
        }
        return e;
    };
    for (auto scheme : {Scheme::split, Scheme::heun}) {
        const double e1 = error(scheme, 0.01);
        const double e2 = error(scheme, 0.005);
        CHECK(e1 < 1e-2);
        CHECK(e2 < 0.6 * e1);
    }
}

TEST_CASE("uncoupled log-wealth moments match the Stratonovich solution") {
    // d log w = m dt + sqrt(2 sigma2) dW for either scheme.
    const std::size_t n = 4000;
    const auto empty = Network::from_edges(n, {});
    BmParams p{0.3, 0.1, 0.0, Coupling::uniform_over_n, 0.01};
    const double T = 1.0;
    for (auto scheme : {Scheme::split, Scheme::heun}) {
        SimulationOptions o;
        o.steps = 100;
        o.seed = 5;
        o.scheme = scheme;
        const auto r = simulate(empty, p, o);
        std::vector<double> lw(n);
        for (std::size_t i = 0; i < n; ++i) {
            lw[i] = std::log(r.final_state.w[i]) + r.final_state.log2_unit * std::log(2.0);
        }
        const double var = 2.0 * p.sigma2 * T;
        CHECK(std::abs(mean_of(lw) - p.drift * T) < 4.0 * std::sqrt(var / n));
        CHECK(std::abs(variance_of(lw) / var - 1.0) < 4.0 * std::sqrt(2.0 / n));
    }
}

TEST_CASE("integrator and one-shot steps agree") {
    const auto net = build({topology::BarabasiAlbert{100, 3, 2}, 2});
    BmParams p;
    Integrator integ(net, p, 77);
    WealthState a = WealthState::uniform(100);
    WealthState b = a;
    for (int k = 0; k < 5; ++k) {
        integ.advance(a);
        b = step_split(b, net, p, 77);
    }
    CHECK(a.w == b.w);
    WealthState wrong = WealthState::uniform(3);
    CHECK_THROWS_AS(integ.advance(wrong), ParameterError);
}

TEST_CASE("rebase shifts by powers of two only") {
    WealthState s;
    s.w = {std::ldexp(1.5, 80), std::ldexp(0.25, 80)};
    const auto before = s.normalized();
    CHECK(rebase_unit(s));
    CHECK(s.normalized() == before);
    CHECK(s.log2_unit == 80);
    CHECK(s.mean() == doctest::Approx(0.875));
    CHECK_FALSE(rebase_unit(s));
}

TEST_CASE("snapshots follow burn-in and stride") {
    const auto net = complete_graph(10);
    BmParams p;
    SimulationOptions o;
    o.steps = 100;
    o.burn_in = 40;
    o.snapshot_every = 20;
    o.seed = 3;
    const auto r = simulate(net, p, o);
    REQUIRE(r.snapshots.size() == 3);
    CHECK(r.snapshots[0].step == 60);
    CHECK(r.snapshots[2].step == 100);
    CHECK(r.snapshots[2].w == r.final_state.w);
    CHECK(mean_of(r.snapshots[1].w_norm) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(simulate(net, p, o).final_state.w == r.final_state.w);

    std::ostringstream csv;
    write_snapshots_csv(csv, r.snapshots);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,vertex,w,w_norm");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 30);

    o.burn_in = 200;
    CHECK_THROWS_AS(simulate(net, p, o), ParameterError);
    o.burn_in = 0;
    o.initial = {1.0, 2.0};
    CHECK_THROWS_AS(simulate(net, p, o), ParameterError);
}

TEST_CASE("lognormal multiplicative reference") {
    const NoiseSpec noise = lognormal(0.0, 0.3);
    const auto path = multiplicative_reference(noise, 100000, 4);
    std::vector<double> inc(path.size() - 1);
    for (std::size_t t = 0; t + 1 < path.size(); ++t) inc[t] = std::log(path[t + 1] / path[t]);
    const double n = static_cast<double>(inc.size());
    CHECK(std::abs(mean_of(inc) - noise.log_mean) < 4 * noise.log_sd / std::sqrt(n));
    CHECK(std::abs(std::sqrt(variance_of(inc)) / noise.log_sd - 1.0) < 4 / std::sqrt(2 * n));
    CHECK(path.front() == 1.0);
}

TEST_CASE("floored reference never drops below the floor") {
    NoiseSpec noise = lognormal(-0.05, 0.3);
    noise.floor = 0.5;
    const auto path = multiplicative_reference(noise, 20000, 1);
    for (double x : path) CHECK(x >= 0.5);
}

TEST_CASE("additive reference reduces to the multiplicative path") {
    NoiseSpec noise = lognormal(-0.05, 0.3);
    noise.additive = AdditiveNoise{0.0, 0.0};
    NoiseSpec plain = lognormal(-0.05, 0.3);
    CHECK(additive_reference(noise, 5000, 6) == multiplicative_reference(plain, 5000, 6));
    NoiseSpec growing = lognormal(0.01, 0.3);
    CHECK_THROWS_AS(additive_reference(growing, 10, 1), ParameterError);
    CHECK_THROWS_AS(multiplicative_reference(noise, 10, 1), ParameterError);
}

TEST_CASE("Pareto index condition") {
    // mu = -0.05, s^2 = 0.09 gives alpha = 0.1 / 0.09.
    CHECK(lognormal_pareto_index(-0.05, 0.3) == doctest::Approx(1.0 / 0.9).epsilon(1e-14));
    for (double mu : {-0.01, -0.05, -0.2}) {
        for (double s : {0.1, 0.3, 0.8}) {
            CHECK(pareto_index_condition(lognormal(mu, s)) ==
                  doctest::Approx(lognormal_pareto_index(mu, s)).epsilon(1e-9));
        }
    }
    // <eta> = 1 when mu = -s^2/2, so alpha = 1.
    CHECK(pareto_index_condition(lognormal(-0.045, 0.3)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(pareto_index_condition(lognormal(0.0, 0.3)), DomainError);
    CHECK_THROWS_AS(pareto_index_condition(lognormal(0.1, 0.3)), DomainError);
    CHECK_THROWS_AS(lognormal_pareto_index(-0.1, 0.0), DomainError);
}
