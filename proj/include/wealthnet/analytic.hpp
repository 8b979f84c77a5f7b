#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace wealthnet {

/// Pareto law: p(w) = alpha w*^alpha / w^(1+alpha) for w >= w*.
/// The density exponent is often quoted as mu = 1 + alpha.
struct ParetoParams {
    double alpha;
    double w_star;

    void validate() const;
    double density_exponent() const noexcept { return 1.0 + alpha; }
};

/// Log-normal (Gibrat) law with index beta = 1/sqrt(2 s^2), where s^2 is
/// the variance of log w and log w0 its mean.
struct GibratParams {
    double beta;
    double w0;

    static GibratParams from_log_variance(double s2, double w0);
    double log_variance() const noexcept { return 1.0 / (2.0 * beta * beta); }
    void validate() const;
};

/// Stationary law of normalized wealth in the fully connected network:
/// an inverse-gamma density with shape alpha and scale alpha - 1, so the
/// mean is exactly one. alpha = 1 + J / sigma^2.
struct MeanFieldParams {
    double alpha;

    static MeanFieldParams from_coupling(double J, double sigma2);
    void validate() const;
};

/// Two-population law: weight core_fraction on the tail component and the
/// remainder on the log-normal body.
struct MixtureParams {
    double core_fraction;
    std::variant<MeanFieldParams, ParetoParams> tail;
    GibratParams body;

    void validate() const;
};

double pareto_pdf(double w, const ParetoParams& p);
double pareto_ccdf(double w, const ParetoParams& p);
double pareto_cdf(double w, const ParetoParams& p);

double gibrat_pdf(double w, const GibratParams& p);
double gibrat_ccdf(double w, const GibratParams& p);
double gibrat_cdf(double w, const GibratParams& p);

double meanfield_pdf(double w, const MeanFieldParams& p);
double meanfield_ccdf(double w, const MeanFieldParams& p);
double meanfield_cdf(double w, const MeanFieldParams& p);

double mixture_pdf(double w, const MixtureParams& p);
double mixture_ccdf(double w, const MixtureParams& p);
double mixture_cdf(double w, const MixtureParams& p);

/// Inverse-CDF map for the Pareto law: u is the survival probability.
double pareto_from_uniform(const ParetoParams& p, double u);

std::vector<double> sample_pareto(const ParetoParams& p, std::size_t count, std::uint64_t seed);
std::vector<double> sample_gibrat(const GibratParams& p, std::size_t count, std::uint64_t seed);
std::vector<double> sample_meanfield(const MeanFieldParams& p, std::size_t count,
                                     std::uint64_t seed);
std::vector<double> sample_mixture(const MixtureParams& p, std::size_t count, std::uint64_t seed);

/// Adaptive Gauss-Kronrod (7/15) quadrature with global error control.
/// Used as the numerical oracle for the closed forms above.
namespace quadrature {

using Integrand = std::function<double(double)>;

struct Result {
    double value;
    double error_estimate;
};

Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 1e-15);

/// Integral over [a, inf) through x = a + t / (1 - t).
Result integrate_to_infinity(const Integrand& f, double a, double rel_tol = 1e-12,
                             double abs_tol = 1e-15);

/// Integral over (0, inf) through w = exp(x) and x = t / (1 - t^2).
Result integrate_positive(const Integrand& f, double rel_tol = 1e-12, double abs_tol = 1e-15);

}  // namespace quadrature

}  // namespace wealthnet
