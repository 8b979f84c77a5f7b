#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "wealthnet/analytic.hpp"

namespace wealthnet {

/// sup_x |ECDF(x) - cdf(x)|, evaluated on both sides of every sample jump.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance between the empirical laws.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic one-sample critical value at the 1% level, 1.63 / sqrt(n).
double ks_critical_1pct(std::size_t n);

struct CcdfPoint {
    double w;
    /// Fraction of samples strictly greater than w.
    double p_greater;
};

/// Empirical complementary CDF at each distinct sample value, ascending in w.
std::vector<CcdfPoint> eccdf(std::span<const double> samples);

/// Least-squares slope of log P_> against log w over the eccdf points with
/// w in [lo, hi] and P_> > 0. Returns nullopt with fewer than two points.
std::optional<double> ccdf_loglog_slope(std::span<const CcdfPoint> ccdf, double lo, double hi);

struct ParetoFit {
    double alpha_hat;
    double w_star_hat;
    std::size_t n_tail;
    double ks;
    double se_alpha;
};

/// Hill (maximum-likelihood) estimate over the samples strictly above w_min.
ParetoFit fit_pareto_tail(std::span<const double> samples, double w_min, std::size_t min_tail = 10);

struct CrossoverOptions {
    std::size_t min_samples = 100;
    std::size_t min_tail = 10;
    /// Upper bound on thresholds scanned; larger candidate sets are thinned
    /// to evenly spaced order statistics.
    std::size_t max_candidates = 4000;
};

/// Chooses w* among sample order statistics by minimizing the KS distance
/// between the tail above w* and its fitted Pareto law; ties go to the
/// smaller threshold.
ParetoFit select_crossover(std::span<const double> samples, const CrossoverOptions& options = {});

struct GibratFit {
    double beta_hat;
    double w0_hat;
    double ks;
    std::size_t n_used;

    GibratParams params() const { return {beta_hat, w0_hat}; }
};

/// Gaussian maximum likelihood on log-samples. With `upper_cut`, only
/// samples below the cut enter and the likelihood is that of the
/// right-truncated normal.
GibratFit fit_gibrat(std::span<const double> samples, std::optional<double> upper_cut = std::nullopt);

struct MixtureFit {
    double core_fraction;
    bool core_fraction_known;
    double w_star_hat;
    std::optional<ParetoFit> tail;
    std::optional<GibratFit> body;
    /// Scale of the assembled Pareto component, at or below w*. Starts where
    /// the mixture reproduces the sample mass above w* and is then refined
    /// for the smallest total KS.
    double tail_scale;
    /// KS distance of all samples against the assembled mixture law.
    double ks;
    /// Log-log CCDF slopes on [w*/4, w*] and [w*, 4 w*].
    double slope_below;
    double slope_above;
    /// |slope_above - slope_below| > kMixedSlopeGap.
    bool mixed_regime;

    MixtureParams params() const;
};

inline constexpr double kMixedSlopeGap = 0.5;

/// With a known core fraction c, the body is fitted (right-truncated) on
/// the samples below w*, capped to the lowest (1 - c) share, and the tail on
/// the samples above w*. Without it, c is grid-searched on [0, 1] in steps
/// of 1/kCoreFractionGrid for the smallest total KS.
MixtureFit fit_mixture(std::span<const double> samples,
                       std::optional<double> core_fraction_known = std::nullopt);

inline constexpr int kCoreFractionGrid = 100;

nlohmann::json to_json(const ParetoFit& fit);
nlohmann::json to_json(const GibratFit& fit);
nlohmann::json to_json(const MixtureFit& fit);

}  // namespace wealthnet
