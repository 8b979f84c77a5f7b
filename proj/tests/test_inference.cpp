#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wealthnet/analytic.hpp"
#include "wealthnet/errors.hpp"
#include "wealthnet/inference.hpp"

using namespace wealthnet;

namespace {

// Direct sup over both sides of every jump, counting the ECDF afresh.
double brute_ks(const std::vector<double>& xs, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (double x : xs) {
        double le = 0.0, lt = 0.0;
        for (double y : xs) {
            if (y <= x) le += 1.0;
            if (y < x) lt += 1.0;
        }
        const double f = cdf(x);
        d = std::max({d, std::abs(le / n - f), std::abs(lt / n - f)});
    }
    return d;
}

struct BruteFit {
    double alpha;
    double w_min;
    double ks;
};

BruteFit brute_hill(const std::vector<double>& xs, double w_min) {
    std::vector<double> tail;
    double s = 0.0;
    for (double x : xs) {
        if (x > w_min) {
            tail.push_back(x);
            s += std::log(x / w_min);
        }
    }
    const double alpha = static_cast<double>(tail.size()) / s;
    const double ks = brute_ks(tail, [&](double x) { return 1.0 - std::pow(w_min / x, alpha); });
    return {alpha, w_min, ks};
}

}  // namespace

TEST_CASE("ks_statistic small cases") {
    const std::vector<double> one{0.0};
    CHECK(ks_statistic(one, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) ==
          doctest::Approx(0.5));
    const std::size_t n = 50;
    std::vector<double> quantiles(n);
    for (std::size_t i = 0; i < n; ++i) quantiles[i] = static_cast<double>(i + 1) / (n + 1);
    CHECK(ks_statistic(quantiles, [](double x) { return x; }) <= 1.0 / (n + 1) + 1e-12);
}

TEST_CASE("ks_statistic matches direct enumeration") {
    const GibratParams g{1.0, 1.0};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto xs = sample_gibrat(g, 200, seed);
        xs[3] = xs[7];  // exercise ties
        auto cdf = [&](double w) { return gibrat_cdf(w, g); };
        CHECK(ks_statistic(xs, cdf) == doctest::Approx(brute_ks(xs, cdf)).epsilon(1e-14));
    }
}

TEST_CASE("ks_statistic is invariant under increasing transforms") {
    const GibratParams g{0.8, 2.0};
    const auto xs = sample_gibrat(g, 5000, 3);
    std::vector<double> logs(xs.size());
    std::transform(xs.begin(), xs.end(), logs.begin(), [](double x) { return std::log(x); });
    const double a = ks_statistic(xs, [&](double w) { return gibrat_cdf(w, g); });
    const double b = ks_statistic(logs, [&](double y) { return gibrat_cdf(std::exp(y), g); });
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("ks_two_sample") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{5, 6, 7};
    CHECK(ks_two_sample(a, b) == 1.0);
    CHECK(ks_two_sample(a, a) == 0.0);
    const std::vector<double> c{1, 2};
    CHECK(ks_two_sample(a, c) == doctest::Approx(0.5));
    CHECK(ks_critical_1pct(10000) == doctest::Approx(0.0163));
}

TEST_CASE("eccdf counting") {
    const std::vector<double> xs{4, 1, 3, 2};
    const auto pts = eccdf(xs);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].w == 1.0);
    CHECK(pts[0].p_greater == 0.75);
    CHECK(pts[3].p_greater == 0.0);
    const std::vector<double> dup{1, 1, 2, 2, 2, 5};
    const auto d = eccdf(dup);
    CHECK(d.size() == 3);
    CHECK(d[1].p_greater == doctest::Approx(1.0 / 6));
}

TEST_CASE("eccdf slope of a Pareto sample") {
    const auto xs = sample_pareto({2.0, 1.0}, 100000, 8);
    const auto pts = eccdf(xs);
    const auto slope = ccdf_loglog_slope(pts, 1.5, 20.0);
    REQUIRE(slope);
    CHECK(std::abs(*slope + 2.0) < 0.1);
    CHECK_FALSE(ccdf_loglog_slope(pts, 1e6, 2e6));
}

TEST_CASE("Hill estimator") {
    const std::vector<double> e{std::exp(1.0)};
    CHECK(fit_pareto_tail(e, 1.0, 1).alpha_hat == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> low(20, 0.5);
    CHECK_THROWS_AS(fit_pareto_tail(low, 1.0), InsufficientDataError);
    CHECK_THROWS_AS(fit_pareto_tail(e, 0.0, 1), DomainError);

    const auto xs = sample_pareto({2.0, 1.0}, 100000, 4);
    const auto fit = fit_pareto_tail(xs, 1.0);
    CHECK(std::abs(fit.alpha_hat - 2.0) < 3 * fit.se_alpha);
    CHECK(fit.se_alpha == doctest::Approx(fit.alpha_hat / std::sqrt(100000.0)));
    CHECK(fit.n_tail == 100000);
    CHECK(fit.ks < ks_critical_1pct(fit.n_tail));

    const auto small = sample_pareto({1.3, 2.0}, 300, 9);
    const auto brute = brute_hill(small, 3.0);
    const auto mine = fit_pareto_tail(small, 3.0);
    CHECK(mine.alpha_hat == doctest::Approx(brute.alpha).epsilon(1e-13));
    CHECK(mine.ks == doctest::Approx(brute.ks).epsilon(1e-12));
}

TEST_CASE("Hill estimate is exactly scale invariant for powers of two") {
    const auto xs = sample_pareto({1.7, 1.0}, 5000, 2);
    const auto base = fit_pareto_tail(xs, 1.3);
    for (int e : {-20, 3, 40}) {
        std::vector<double> scaled(xs.size());
        std::transform(xs.begin(), xs.end(), scaled.begin(), [e](double x) { return std::ldexp(x, e); });
        const auto fit = fit_pareto_tail(scaled, std::ldexp(1.3, e));
        CHECK(fit.alpha_hat == base.alpha_hat);
        CHECK(fit.n_tail == base.n_tail);
    }
}

TEST_CASE("crossover selection agrees with an exhaustive scan") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const MixtureParams mp{0.3, ParetoParams{1.5, 1.0}, GibratParams{2.0, 0.5}};
        auto xs = sample_mixture(mp, 400, seed);
        std::sort(xs.begin(), xs.end());
        BruteFit best{0, 0, std::numeric_limits<double>::infinity()};
        // Candidates keep at least 10 points strictly above them.
        for (std::size_t i = 0; i + 10 < xs.size(); ++i) {
            if (i > 0 && xs[i] == xs[i - 1]) continue;
            const auto f = brute_hill(xs, xs[i]);
            if (f.ks < best.ks) best = f;
        }
        const auto fit = select_crossover(xs);
        CHECK(fit.w_star_hat == best.w_min);
        CHECK(fit.alpha_hat == doctest::Approx(best.alpha).epsilon(1e-12));
        CHECK(fit.ks == doctest::Approx(best.ks).epsilon(1e-12));
    }
}

TEST_CASE("crossover on pure and mixed samples") {
    const auto pure = sample_pareto({2.0, 1.0}, 20000, 5);
    const auto fit = select_crossover(pure);
    const auto [lo, hi] = std::minmax_element(pure.begin(), pure.end());
    CHECK(fit.w_star_hat <= *lo + 0.1 * (*hi - *lo));
    CHECK(std::abs(fit.alpha_hat - 2.0) < 3 * fit.se_alpha);

    const MixtureParams mp{1.0 / 8, ParetoParams{2.0, 1.0}, GibratParams{2.0, 0.5}};
    const auto mixed = sample_mixture(mp, 100000, 6);
    CHECK(std::abs(select_crossover(mixed).alpha_hat - 2.0) < 0.2);

    std::vector<double> ramp(100);
    std::iota(ramp.begin(), ramp.end(), 1.0);
    CHECK_NOTHROW(select_crossover(ramp));
    CHECK_THROWS_AS(select_crossover(std::vector<double>(99, 1.0)), InsufficientDataError);
    CHECK_THROWS_AS(select_crossover(std::vector<double>(200, 1.0)), InsufficientDataError);
}

TEST_CASE("Gibrat fit") {
    const auto xs = sample_gibrat({2.5, 1.0}, 100000, 3);
    const auto fit = fit_gibrat(xs);
    CHECK(std::abs(fit.beta_hat / 2.5 - 1.0) < 0.02);
    CHECK(fit.n_used == 100000);
    CHECK(fit.ks < ks_critical_1pct(100000));

    // Log-samples at -s and +s in equal numbers: mean 0, variance s^2 = 0.125.
    const double s = std::sqrt(0.125);
    std::vector<double> two;
    for (int i = 0; i < 20; ++i) {
        two.push_back(std::exp(-s));
        two.push_back(std::exp(s));
    }
    const auto exact = fit_gibrat(two);
    CHECK(exact.beta_hat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(exact.w0_hat == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_gibrat(std::vector<double>(50, 2.0)), DomainError);
    auto bad = xs;
    bad[0] = -1.0;
    CHECK_THROWS_AS(fit_gibrat(bad), DomainError);
    CHECK_THROWS_AS(fit_gibrat(std::vector<double>(10, 1.0)), InsufficientDataError);
}

TEST_CASE("right-truncated Gibrat fit recovers the untruncated law") {
    const GibratParams truth{1.5, 2.0};
    const auto xs = sample_gibrat(truth, 100000, 12);
    for (double cut : {1.5, 2.0, 4.0}) {
        const auto fit = fit_gibrat(xs, cut);
        CHECK(std::abs(fit.beta_hat / truth.beta - 1.0) < 0.03);
        CHECK(std::abs(std::log(fit.w0_hat / truth.w0)) < 0.03);
        CHECK(fit.ks < ks_critical_1pct(fit.n_used));
    }
}

TEST_CASE("mixture fit on sampled mixtures") {
    const MixtureParams mp{0.25, ParetoParams{2.0, 1.0}, GibratParams{2.0, 0.5}};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto xs = sample_mixture(mp, 10000, seed);
        const auto known = fit_mixture(xs, 0.25);
        CHECK(known.ks < ks_critical_1pct(xs.size()));
        CHECK(known.core_fraction_known);
        CHECK(known.tail_scale <= known.w_star_hat);
        CHECK(std::isfinite(known.slope_below));
        CHECK(std::isfinite(known.slope_above));
        const auto free = fit_mixture(xs);
        CHECK_FALSE(free.core_fraction_known);
        CHECK(free.ks <= known.ks + 1e-12 + ks_critical_1pct(xs.size()));
        CHECK(free.ks < ks_critical_1pct(xs.size()));
    }
}

TEST_CASE("mixture fit boundary fractions") {
    const MixtureParams mp{0.25, ParetoParams{2.0, 1.0}, GibratParams{2.0, 0.5}};
    const auto xs = sample_mixture(mp, 5000, 4);
    const auto zero = fit_mixture(xs, 0.0);
    const auto g = fit_gibrat(xs);
    REQUIRE(zero.body);
    CHECK(zero.body->beta_hat == g.beta_hat);
    CHECK(zero.body->w0_hat == g.w0_hat);
    CHECK(zero.ks == doctest::Approx(g.ks).epsilon(1e-12));
    auto reversed = xs;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(fit_gibrat(reversed).beta_hat == g.beta_hat);

    const auto one = fit_mixture(xs, 1.0);
    const auto c = select_crossover(xs);
    REQUIRE(one.tail);
    CHECK(one.tail->alpha_hat == c.alpha_hat);
    CHECK(one.w_star_hat == c.w_star_hat);
    CHECK(one.tail->ks == c.ks);

    CHECK_THROWS_AS(fit_mixture(std::vector<double>(199, 1.0)), InsufficientDataError);
    CHECK_THROWS_AS(fit_mixture(xs, 1.5), ParameterError);
}

TEST_CASE("fits are deterministic and serialize with fixed keys") {
    const MixtureParams mp{0.25, ParetoParams{2.0, 1.0}, GibratParams{2.0, 0.5}};
    const auto xs = sample_mixture(mp, 3000, 7);
    const auto a = fit_mixture(xs, 0.25);
    const auto b = fit_mixture(xs, 0.25);
    CHECK(to_json(a) == to_json(b));
    const auto j = to_json(a);
    for (const char* key : {"core_fraction", "w_star_hat", "tail_scale", "ks", "slope_below",
                            "slope_above", "mixed_regime", "tail", "body"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["tail"].contains("alpha_hat"));
    CHECK(j["body"].contains("beta_hat"));
    CHECK(j["body"].contains("w0_hat"));
    CHECK(j["tail"].contains("n_tail"));
}
