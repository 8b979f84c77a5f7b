#include "wealthnet/analytic.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "wealthnet/errors.hpp"
#include "wealthnet/rng.hpp"

namespace wealthnet {

void ParetoParams::validate() const {
    if (!(alpha > 0.0)) throw ParameterError("pareto: alpha must be positive");
    if (!(w_star > 0.0)) throw ParameterError("pareto: w_star must be positive");
}

GibratParams GibratParams::from_log_variance(double s2, double w0) {
    if (!(s2 > 0.0)) throw DomainError("gibrat: log-variance must be positive");
    return {1.0 / std::sqrt(2.0 * s2), w0};
}

void GibratParams::validate() const {
    if (!(beta > 0.0)) throw ParameterError("gibrat: beta must be positive");
    if (!(w0 > 0.0)) throw ParameterError("gibrat: w0 must be positive");
}

MeanFieldParams MeanFieldParams::from_coupling(double J, double sigma2) {
    if (!(sigma2 > 0.0)) throw ParameterError("meanfield: sigma2 must be positive");
    return {1.0 + J / sigma2};
}

void MeanFieldParams::validate() const {
    if (!(alpha > 1.0)) {
        throw DomainError("meanfield: alpha must exceed 1 (got " + std::to_string(alpha) +
                          "); the law is not normalizable");
    }
}

void MixtureParams::validate() const {
    if (!(core_fraction >= 0.0 && core_fraction <= 1.0)) {
        throw ParameterError("mixture: core_fraction must lie in [0,1]");
    }
    std::visit([](const auto& t) { t.validate(); }, tail);
    body.validate();
}

double pareto_pdf(double w, const ParetoParams& p) {
    p.validate();
    if (w < p.w_star) return 0.0;
    return p.alpha / p.w_star * std::pow(p.w_star / w, 1.0 + p.alpha);
}

double pareto_ccdf(double w, const ParetoParams& p) {
    p.validate();
    if (w <= p.w_star) return 1.0;
    return std::pow(p.w_star / w, p.alpha);
}

double pareto_cdf(double w, const ParetoParams& p) {
    p.validate();
    if (w <= p.w_star) return 0.0;
    return -std::expm1(p.alpha * std::log(p.w_star / w));
}

namespace {

void require_positive_wealth(double w, const char* law) {
    if (!(w > 0.0)) throw DomainError(std::string(law) + ": wealth must be positive");
}

}  // namespace

double gibrat_pdf(double w, const GibratParams& p) {
    p.validate();
    require_positive_wealth(w, "gibrat");
    const double l = std::log(w / p.w0);
    return p.beta / (w * std::sqrt(std::numbers::pi)) * std::exp(-p.beta * p.beta * l * l);
}

double gibrat_ccdf(double w, const GibratParams& p) {
    p.validate();
    require_positive_wealth(w, "gibrat");
    return 0.5 * std::erfc(p.beta * std::log(w / p.w0));
}

double gibrat_cdf(double w, const GibratParams& p) {
    p.validate();
    require_positive_wealth(w, "gibrat");
    return 0.5 * std::erfc(-p.beta * std::log(w / p.w0));
}

double meanfield_pdf(double w, const MeanFieldParams& p) {
    p.validate();
    if (w <= 0.0) return 0.0;
    const double a = p.alpha;
    const double log_pdf =
        a * std::log(a - 1.0) - std::lgamma(a) + (1.0 - a) / w - (1.0 + a) * std::log(w);
    return std::exp(log_pdf);
}

double meanfield_ccdf(double w, const MeanFieldParams& p) {
    p.validate();
    if (w <= 0.0) return 1.0;
    if (std::isinf(w)) return 0.0;
    return boost::math::gamma_p(p.alpha, (p.alpha - 1.0) / w);
}

double meanfield_cdf(double w, const MeanFieldParams& p) {
    p.validate();
    if (w <= 0.0) return 0.0;
    if (std::isinf(w)) return 1.0;
    return boost::math::gamma_q(p.alpha, (p.alpha - 1.0) / w);
}

namespace {

template <class Fn>
double mix(const MixtureParams& p, Fn&& tail_fn, double body_value) {
    const double tail_value = std::visit(tail_fn, p.tail);
    return p.core_fraction * tail_value + (1.0 - p.core_fraction) * body_value;
}

}  // namespace

double mixture_pdf(double w, const MixtureParams& p) {
    p.validate();
    auto tail = [w](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ParetoParams>) return pareto_pdf(w, t);
        else return meanfield_pdf(w, t);
    };
    return mix(p, tail, gibrat_pdf(w, p.body));
}

double mixture_ccdf(double w, const MixtureParams& p) {
    p.validate();
    auto tail = [w](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ParetoParams>) return pareto_ccdf(w, t);
        else return meanfield_ccdf(w, t);
    };
    return mix(p, tail, gibrat_ccdf(w, p.body));
}

double mixture_cdf(double w, const MixtureParams& p) {
    p.validate();
    auto tail = [w](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ParetoParams>) return pareto_cdf(w, t);
        else return meanfield_cdf(w, t);
    };
    return mix(p, tail, gibrat_cdf(w, p.body));
}

double pareto_from_uniform(const ParetoParams& p, double u) {
    p.validate();
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("pareto: survival probability must lie in (0,1]");
    return p.w_star * std::pow(u, -1.0 / p.alpha);
}

std::vector<double> sample_pareto(const ParetoParams& p, std::size_t count, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = pareto_from_uniform(p, rng.uniform_open());
    return out;
}

std::vector<double> sample_gibrat(const GibratParams& p, std::size_t count, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    const double s = std::sqrt(p.log_variance());
    const double mu = std::log(p.w0);
    std::vector<double> out(count);
    for (auto& x : out) x = std::exp(mu + s * rng.normal());
    return out;
}

std::vector<double> sample_meanfield(const MeanFieldParams& p, std::size_t count,
                                     std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> out(count);
    // Reciprocal of Gamma(shape alpha, rate alpha - 1).
    for (auto& x : out) x = (p.alpha - 1.0) / rng.gamma(p.alpha);
    return out;
}

std::vector<double> sample_mixture(const MixtureParams& p, std::size_t count, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    const double s = std::sqrt(p.body.log_variance());
    const double mu = std::log(p.body.w0);
    std::vector<double> out(count);
    for (auto& x : out) {
        if (rng.bernoulli(p.core_fraction)) {
            x = std::visit(
                [&rng](const auto& t) -> double {
                    using T = std::decay_t<decltype(t)>;
                    if constexpr (std::is_same_v<T, ParetoParams>) {
                        return pareto_from_uniform(t, rng.uniform_open());
                    } else {
                        return (t.alpha - 1.0) / rng.gamma(t.alpha);
                    }
                },
                p.tail);
        } else {
            x = std::exp(mu + s * rng.normal());
        }
    }
    return out;
}

namespace quadrature {

namespace {

constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const noexcept { return error < o.error; }
};

Segment kronrod15(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * pair;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
    constexpr int kMaxSegments = 4000;
    std::priority_queue<Segment> heap;
    const Segment first = kronrod15(f, a, b);
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int segments = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(total)) && segments < kMaxSegments) {
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = kronrod15(f, worst.a, mid);
        const Segment right = kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    total = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {total, error};
}

Result integrate_to_infinity(const Integrand& f, double a, double rel_tol, double abs_tol) {
    auto mapped = [&f, a](double t) {
        const double one_minus = 1.0 - t;
        const double x = a + t / one_minus;
        const double v = f(x);
        return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
    };
    return integrate(mapped, 0.0, 1.0, rel_tol, abs_tol);
}

Result integrate_positive(const Integrand& f, double rel_tol, double abs_tol) {
    auto mapped = [&f](double t) {
        const double d = 1.0 - t * t;
        const double x = t / d;
        if (x > 700.0 || x < -700.0) return 0.0;
        const double w = std::exp(x);
        const double v = f(w);
        return v == 0.0 ? 0.0 : v * w * (1.0 + t * t) / (d * d);
    };
    return integrate(mapped, -1.0, 1.0, rel_tol, abs_tol);
}

}  // namespace quadrature

}  // namespace wealthnet
