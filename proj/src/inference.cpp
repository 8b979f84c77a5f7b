#include "wealthnet/inference.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "wealthnet/errors.hpp"

namespace wealthnet {

namespace {

std::vector<double> sorted_copy(std::span<const double> samples) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    return s;
}

template <class Cdf>
double ks_sorted(std::span<const double> sorted, Cdf&& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InsufficientDataError("ks_statistic: no samples");
    const auto sorted = sorted_copy(samples);
    return ks_sorted(sorted, cdf);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InsufficientDataError("ks_two_sample: empty sample");
    const auto sa = sorted_copy(a);
    const auto sb = sorted_copy(b);
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

std::vector<CcdfPoint> eccdf(std::span<const double> samples) {
    if (samples.empty()) throw InsufficientDataError("eccdf: no samples");
    const auto s = sorted_copy(samples);
    const double n = static_cast<double>(s.size());
    std::vector<CcdfPoint> out;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        out.push_back({s[i], static_cast<double>(s.size() - j) / n});
        i = j;
    }
    return out;
}

std::optional<double> ccdf_loglog_slope(std::span<const CcdfPoint> ccdf, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (const auto& p : ccdf) {
        if (p.w < lo || p.w > hi || !(p.p_greater > 0.0) || !(p.w > 0.0)) continue;
        const double x = std::log(p.w);
        const double y = std::log(p.p_greater);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return std::nullopt;
    const double mm = static_cast<double>(m);
    const double denom = sxx - sx * sx / mm;
    if (!(denom > 0.0)) return std::nullopt;
    return (sxy - sx * sy / mm) / denom;
}

// --- Pareto tail ----------------------------------------------------------

ParetoFit fit_pareto_tail(std::span<const double> samples, double w_min, std::size_t min_tail) {
    if (!(w_min > 0.0)) throw DomainError("fit_pareto_tail: w_min must be positive");
    std::vector<double> tail;
    for (double x : samples) {
        if (x > w_min) tail.push_back(x);
    }
    if (tail.size() < std::max<std::size_t>(min_tail, 1)) {
        throw InsufficientDataError("fit_pareto_tail: " + std::to_string(tail.size()) +
                                    " samples above w_min, need " + std::to_string(min_tail));
    }
    double log_excess = 0.0;
    for (double x : tail) log_excess += std::log(x / w_min);
    const double nt = static_cast<double>(tail.size());
    ParetoFit fit;
    fit.alpha_hat = nt / log_excess;
    fit.w_star_hat = w_min;
    fit.n_tail = tail.size();
    fit.se_alpha = fit.alpha_hat / std::sqrt(nt);
    std::sort(tail.begin(), tail.end());
    const ParetoParams law{fit.alpha_hat, w_min};
    fit.ks = ks_sorted(tail, [&law](double x) { return pareto_cdf(x, law); });
    return fit;
}

ParetoFit select_crossover(std::span<const double> samples, const CrossoverOptions& options) {
    if (samples.size() < options.min_samples) {
        throw InsufficientDataError("select_crossover: " + std::to_string(samples.size()) +
                                    " samples, need " + std::to_string(options.min_samples));
    }
    const auto x = sorted_copy(samples);
    if (!(x.front() > 0.0)) throw DomainError("select_crossover: samples must be positive");
    const std::size_t n = x.size();
    std::vector<double> lx(n);
    std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + lx[i];

    // Candidate thresholds: distinct values leaving at least min_tail
    // samples strictly above. Stored as (threshold index, first tail index).
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && x[j] == x[i]) ++j;
        if (n - j < options.min_tail) break;
        candidates.emplace_back(i, j);
        i = j;
    }
    if (candidates.empty()) {
        throw InsufficientDataError("select_crossover: no threshold leaves " +
                                    std::to_string(options.min_tail) + " tail samples");
    }
    if (candidates.size() > options.max_candidates) {
        std::vector<std::pair<std::size_t, std::size_t>> thinned;
        const std::size_t m = options.max_candidates;
        for (std::size_t k = 0; k < m; ++k) {
            thinned.push_back(candidates[k * (candidates.size() - 1) / (m - 1)]);
        }
        thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
        candidates = std::move(thinned);
    }

    double best_ks = 2.0;
    std::size_t best = 0;
    double best_alpha = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto [i, j] = candidates[c];
        const double nt = static_cast<double>(n - j);
        const double log_w = lx[i];
        const double alpha = nt / (suffix[j] - nt * log_w);
        double d = 0.0;
        for (std::size_t k = j; k < n; ++k) {
            const double f = -std::expm1(-alpha * (lx[k] - log_w));
            const double rank = static_cast<double>(k - j);
            d = std::max({d, (rank + 1.0) / nt - f, f - rank / nt});
            if (d >= best_ks) break;
        }
        if (d < best_ks) {
            best_ks = d;
            best = c;
            best_alpha = alpha;
        }
    }
    const auto [i, j] = candidates[best];
    ParetoFit fit;
    fit.alpha_hat = best_alpha;
    fit.w_star_hat = x[i];
    fit.n_tail = n - j;
    fit.ks = best_ks;
    fit.se_alpha = best_alpha / std::sqrt(static_cast<double>(fit.n_tail));
    return fit;
}

// --- log-normal body ------------------------------------------------------

namespace {

struct NormalFit {
    double mean;
    double sd;
};

/// Maximum likelihood for a normal right-truncated at `cut`. Matches the
/// first two moments of the truncated law (exponential family), solving for
/// the standardized cut a = (cut - mu) / sd.
std::optional<NormalFit> truncated_normal_fit(double sample_mean, double sample_var, double cut) {
    const double d = cut - sample_mean;
    if (!(d > 0.0) || !(sample_var > 0.0)) return std::nullopt;
    const double target = sample_var / (d * d);
    auto lambda = [](double a) { return normal_pdf(a) / normal_cdf(a); };
    auto ratio = [&](double a) {
        const double l = lambda(a);
        return (1.0 - a * l - l * l) / ((a + l) * (a + l));
    };
    constexpr double lo = -30.0, hi = 30.0;
    if (target >= ratio(lo) || target <= ratio(hi)) return std::nullopt;
    std::uintmax_t iterations = 200;
    const auto [a0, a1] = boost::math::tools::toms748_solve(
        [&](double a) { return ratio(a) - target; }, lo, hi,
        boost::math::tools::eps_tolerance<double>(48), iterations);
    const double a = 0.5 * (a0 + a1);
    const double sd = d / (a + lambda(a));
    return NormalFit{cut - a * sd, sd};
}

}  // namespace

GibratFit fit_gibrat(std::span<const double> samples, std::optional<double> upper_cut) {
    for (double x : samples) {
        if (!(x > 0.0)) throw DomainError("fit_gibrat: samples must be positive");
    }
    std::vector<double> logs;
    for (double x : samples) {
        if (!upper_cut || x < *upper_cut) logs.push_back(std::log(x));
    }
    if (logs.size() < 30) {
        throw InsufficientDataError("fit_gibrat: " + std::to_string(logs.size()) +
                                    " usable samples, need 30");
    }
    // Sorted first so the sums, and hence the fit, ignore input order.
    std::sort(logs.begin(), logs.end());
    if (logs.front() == logs.back()) throw DomainError("fit_gibrat: log-samples have zero variance");
    const double n = static_cast<double>(logs.size());
    const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
    double var = 0.0;
    for (double y : logs) var += (y - mean) * (y - mean);
    var /= n;

    NormalFit nf{mean, std::sqrt(var)};
    double cut_mass = 1.0;
    if (upper_cut) {
        if (auto t = truncated_normal_fit(mean, var, std::log(*upper_cut))) nf = *t;
        cut_mass = normal_cdf((std::log(*upper_cut) - nf.mean) / nf.sd);
    }
    GibratFit fit;
    fit.beta_hat = 1.0 / (nf.sd * std::numbers::sqrt2);
    fit.w0_hat = std::exp(nf.mean);
    fit.n_used = logs.size();
    fit.ks = ks_sorted(logs, [&](double y) { return normal_cdf((y - nf.mean) / nf.sd) / cut_mass; });
    return fit;
}

// --- mixture --------------------------------------------------------------

MixtureParams MixtureFit::params() const {
    const double alpha = tail ? tail->alpha_hat : 1.0;
    const GibratParams g = body ? body->params() : GibratParams{1.0, 1.0};
    return {core_fraction, ParetoParams{alpha, tail_scale}, g};
}

namespace {

double window_slope(std::span<const CcdfPoint> ccdf, double lo, double hi) {
    // Fewer than two points means the empirical CCDF is flat on the window.
    return ccdf_loglog_slope(ccdf, lo, hi).value_or(0.0);
}

constexpr int kScalePasses = 4;

MixtureFit assemble(std::span<const double> sorted, const ParetoFit& crossover, double cf) {
    const std::size_t n = sorted.size();
    const double w_star = crossover.w_star_hat;
    MixtureFit fit{};
    fit.core_fraction = cf;
    fit.w_star_hat = w_star;
    fit.tail_scale = w_star;

    // The body is fitted below the smaller of the (1 - cf) sample quantile and
    // the tail scale, where the assembled tail carries no mass. The tail scale
    // in turn depends on the body mass above w*, so the two are iterated.
    double quantile_cut = w_star;
    const auto body_cap = static_cast<std::size_t>(std::floor((1.0 - cf) * static_cast<double>(n)));
    if (body_cap < n) quantile_cut = std::min(quantile_cut, sorted[body_cap]);
    const double above = static_cast<double>(crossover.n_tail) / static_cast<double>(n);
    for (int pass = 0; pass < kScalePasses; ++pass) {
        if (cf < 1.0) {
            const double cut = std::min(quantile_cut, fit.tail_scale);
            fit.body = cf > 0.0 ? fit_gibrat(sorted, cut) : fit_gibrat(sorted);
        }
        if (cf == 0.0) break;
        fit.tail = crossover;
        const double body_above = fit.body ? (1.0 - cf) * gibrat_ccdf(w_star, fit.body->params()) : 0.0;
        const double r = (above - body_above) / cf;
        const double scale = r > 0.0 && r < 1.0 ? w_star * std::pow(r, 1.0 / crossover.alpha_hat) : w_star;
        if (scale == fit.tail_scale || cf == 1.0) break;
        fit.tail_scale = scale;
    }

    auto total_ks = [&](const MixtureFit& f) {
        const MixtureParams law = f.params();
        return ks_sorted(sorted, [&law](double w) { return mixture_cdf(w, law); });
    };
    fit.ks = total_ks(fit);
    if (cf > 0.0 && cf < 1.0) {
        // Refine the tail scale for the smallest total KS, searching in log
        // space from a quarter of the mass-matched scale up to w*.
        MixtureFit trial = fit;
        auto objective = [&](double log_scale) {
            trial.tail_scale = std::exp(log_scale);
            return total_ks(trial);
        };
        std::uintmax_t iterations = 60;
        const auto [log_best, ks_best] = boost::math::tools::brent_find_minima(
            objective, std::log(fit.tail_scale / 4.0), std::log(w_star), 24, iterations);
        if (ks_best < fit.ks) {
            fit.tail_scale = std::exp(log_best);
            fit.ks = ks_best;
        }
    }
    return fit;
}

}  // namespace

MixtureFit fit_mixture(std::span<const double> samples, std::optional<double> core_fraction_known) {
    if (samples.size() < 200) {
        throw InsufficientDataError("fit_mixture: " + std::to_string(samples.size()) +
                                    " samples, need 200");
    }
    if (core_fraction_known && !(*core_fraction_known >= 0.0 && *core_fraction_known <= 1.0)) {
        throw ParameterError("fit_mixture: core_fraction must lie in [0,1]");
    }
    const auto sorted = sorted_copy(samples);
    if (!(sorted.front() > 0.0)) throw DomainError("fit_mixture: samples must be positive");
    const ParetoFit crossover = select_crossover(sorted);

    MixtureFit fit{};
    if (core_fraction_known) {
        fit = assemble(sorted, crossover, *core_fraction_known);
        fit.core_fraction_known = true;
    } else {
        bool found = false;
        for (int k = 0; k <= kCoreFractionGrid; ++k) {
            const double cf = static_cast<double>(k) / kCoreFractionGrid;
            try {
                MixtureFit candidate = assemble(sorted, crossover, cf);
                if (!found || candidate.ks < fit.ks) {
                    fit = std::move(candidate);
                    found = true;
                }
            } catch (const InsufficientDataError&) {
                // Body too thin at this weight; other grid points may still fit.
            }
        }
        if (!found) throw InsufficientDataError("fit_mixture: no core fraction yields a valid fit");
        fit.core_fraction_known = false;
    }

    const auto ccdf = eccdf(sorted);
    fit.slope_below = window_slope(ccdf, fit.w_star_hat / 4.0, fit.w_star_hat);
    fit.slope_above = window_slope(ccdf, fit.w_star_hat, 4.0 * fit.w_star_hat);
    fit.mixed_regime = std::abs(fit.slope_above - fit.slope_below) > kMixedSlopeGap;
    return fit;
}

nlohmann::json to_json(const ParetoFit& fit) {
    return {{"alpha_hat", fit.alpha_hat}, {"w_star_hat", fit.w_star_hat}, {"n_tail", fit.n_tail},
            {"ks", fit.ks}, {"se_alpha", fit.se_alpha}};
}

nlohmann::json to_json(const GibratFit& fit) {
    return {{"beta_hat", fit.beta_hat}, {"w0_hat", fit.w0_hat}, {"ks", fit.ks}, {"n_used", fit.n_used}};
}

nlohmann::json to_json(const MixtureFit& fit) {
    nlohmann::json j{{"core_fraction", fit.core_fraction},
                     {"core_fraction_known", fit.core_fraction_known},
                     {"w_star_hat", fit.w_star_hat},
                     {"tail_scale", fit.tail_scale},
                     {"ks", fit.ks},
                     {"slope_below", fit.slope_below},
                     {"slope_above", fit.slope_above},
                     {"mixed_regime", fit.mixed_regime}};
    j["tail"] = fit.tail ? to_json(*fit.tail) : nlohmann::json(nullptr);
    j["body"] = fit.body ? to_json(*fit.body) : nlohmann::json(nullptr);
    return j;
}

}  // namespace wealthnet
