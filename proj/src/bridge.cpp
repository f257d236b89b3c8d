#include "qfr/bridge.hpp"

#include <algorithm>
#include <cmath>

#include "qfr/isotonic_estimators.hpp"
#include "qfr/quantile_estimators.hpp"
#include "qfr/stats.hpp"

namespace qfr {

ErrorSpec ErrorSpec::noise_only(double sigma_v) {
    if (!(sigma_v > 0.0)) throw DomainError("noise_only requires sigma_v > 0");
    return ErrorSpec{ErrorKind::NoiseOnly, sigma_v, 0.0};
}

ErrorSpec ErrorSpec::inefficiency_only(double sigma_u) {
    if (!(sigma_u > 0.0)) throw DomainError("inefficiency_only requires sigma_u > 0");
    return ErrorSpec{ErrorKind::InefficiencyOnly, 0.0, sigma_u};
}

ErrorSpec ErrorSpec::composite(double sigma_v, double sigma_u) {
    if (!(sigma_v > 0.0) || !(sigma_u > 0.0))
        throw DomainError("composite requires sigma_v > 0 and sigma_u > 0");
    return ErrorSpec{ErrorKind::Composite, sigma_v, sigma_u};
}

double ErrorSpec::density(double e) const {
    switch (kind) {
        case ErrorKind::NoiseOnly:
            return norm_pdf(e / sigma_v) / sigma_v;
        case ErrorKind::InefficiencyOnly:
            return e <= 0.0 ? 2.0 * norm_pdf(e / sigma_u) / sigma_u : 0.0;
        case ErrorKind::Composite: {
            const double sigma = std::sqrt(sigma_u * sigma_u + sigma_v * sigma_v);
            const double lambda = sigma_u / sigma_v;
            return 2.0 / sigma * norm_pdf(e / sigma) * norm_cdf(-e * lambda / sigma);
        }
    }
    return 0.0;
}

std::pair<double, double> ErrorSpec::support_bounds() const {
    switch (kind) {
        case ErrorKind::NoiseOnly: return {-12.0 * sigma_v, 12.0 * sigma_v};
        case ErrorKind::InefficiencyOnly: return {-12.0 * sigma_u, 0.0};
        case ErrorKind::Composite: {
            const double sigma = std::sqrt(sigma_u * sigma_u + sigma_v * sigma_v);
            return {-12.0 * sigma, 12.0 * sigma};
        }
    }
    return {0.0, 0.0};
}

double error_quantile(const ErrorSpec& spec, QuantileLevel tau) {
    if (!tau.is_quantile()) throw DomainError("error_quantile expects a quantile level");
    const double t = tau.value();
    switch (spec.kind) {
        case ErrorKind::NoiseOnly:
            return spec.sigma_v * norm_inv_cdf(t);
        case ErrorKind::InefficiencyOnly:
            // CDF of -|N(0, su^2)| is 2 Phi(e / su) on e <= 0
            return spec.sigma_u * norm_inv_cdf(0.5 * t);
        case ErrorKind::Composite: {
            const auto [lo, hi] = spec.support_bounds();
            const auto cdf_minus_t = [&](double e) {
                return integrate([&](double u) { return spec.density(u); }, lo, e, 1e-11) - t;
            };
            return brent_root(cdf_minus_t, lo, hi, 1e-9);
        }
    }
    throw DomainError("unknown error kind");
}

double theoretical_expectile_of_quantile(const ErrorSpec& spec, QuantileLevel tau) {
    if (!tau.is_quantile())
        throw DomainError("theoretical_expectile_of_quantile expects a quantile level");
    const double q = error_quantile(spec, tau);
    const auto [lo, hi] = spec.support_bounds();
    const auto moment = [&](double a, double b) {
        if (a >= b) return 0.0;
        return integrate([&](double u) { return (u - q) * spec.density(u); }, a, b, 1e-10);
    };
    const double lpm = moment(lo, q);  // <= 0
    const double upm = moment(q, hi);  // >= 0
    const double tt = lpm / (lpm - upm);
    return std::clamp(tt, 1e-12, 1.0 - 1e-12);
}

double quantile_of_theoretical_expectile(const ErrorSpec& spec, QuantileLevel tau_tilde) {
    if (!tau_tilde.is_expectile())
        throw DomainError("quantile_of_theoretical_expectile expects an expectile level");
    const double target = tau_tilde.value();
    const auto g = [&](double t) {
        return theoretical_expectile_of_quantile(spec, QuantileLevel::quantile(t)) - target;
    };
    const double lo = 1e-7, hi = 1.0 - 1e-7;
    if (g(lo) > 0.0) return lo;
    if (g(hi) < 0.0) return hi;
    return brent_root(g, lo, hi, 1e-10);
}

double empirical_quantile_level(const FrontierFit& fit, double threshold) {
    if (!is_regression_method(fit.method))
        throw DomainError("empirical_quantile_level expects a regression fit");
    std::size_t count = 0;
    for (double v : fit.residual_neg)
        if (v > threshold) ++count;
    return static_cast<double>(count) / static_cast<double>(fit.n());
}

namespace {

FrontierFit fit_expectile(const Dataset& dataset, double tau_tilde, ExpectileEstimator which,
                          AfriatCache* cache) {
    const QuantileLevel level = QuantileLevel::expectile(tau_tilde);
    return which == ExpectileEstimator::CER ? fit_cer(dataset, level, cache)
                                            : fit_icer(dataset, level, nullptr, cache);
}

} // namespace

std::pair<ExpectileCalibration, FrontierFit> calibrate_expectile(
    const Dataset& dataset, QuantileLevel target_tau, const std::vector<double>& grid,
    CalibrationMethod method, ExpectileEstimator estimator) {
    if (!target_tau.is_quantile())
        throw DomainError("calibrate_expectile expects a quantile target");
    if (grid.empty()) throw DomainError("expectile grid must be nonempty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0 && grid[k] < 1.0))
            throw DomainError("expectile grid levels must lie in (0,1)");
        if (k > 0 && grid[k] <= grid[k - 1])
            throw DomainError("expectile grid must be strictly ascending");
    }
    const double target = target_tau.value();
    constexpr double kThreshold = 1e-6;

    ExpectileCalibration cal;
    cal.target_tau = target;
    cal.grid = grid;
    cal.achieved_levels.resize(grid.size());
    cal.method = method;

    AfriatCache cache;
    std::size_t best_idx = 0;
    double best_gap = kInf;
    FrontierFit best_fit{Method::CER, QuantileLevel::expectile(0.5), std::nullopt, std::nullopt,
                         {}, {}, {}, 0.0};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        FrontierFit fit = fit_expectile(dataset, grid[k], estimator, &cache);
        cal.achieved_levels[k] = empirical_quantile_level(fit, kThreshold);
        const double gap = std::fabs(cal.achieved_levels[k] - target);
        if (gap < best_gap) { // strict: ties resolve to the smaller grid level
            best_gap = gap;
            best_idx = k;
            best_fit = std::move(fit);
        }
    }

    const double lo_ach = *std::min_element(cal.achieved_levels.begin(), cal.achieved_levels.end());
    const double hi_ach = *std::max_element(cal.achieved_levels.begin(), cal.achieved_levels.end());
    if (target < lo_ach || target > hi_ach)
        throw CalibrationError("target quantile level " + std::to_string(target) +
                               " lies outside the achieved range [" + std::to_string(lo_ach) +
                               ", " + std::to_string(hi_ach) + "]");

    if (method == CalibrationMethod::EfronCount) {
        cal.selected_tau_tilde = grid[best_idx];
        return {std::move(cal), std::move(best_fit)};
    }

    // Waltrup: linear interpolation between the first bracketing neighbors
    std::size_t k = grid.size(); // sentinel
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = cal.achieved_levels[i], b = cal.achieved_levels[i + 1];
        if (a <= target && target <= b) { k = i; break; }
    }
    double tt;
    if (k == grid.size()) {
        // levels straddle the target only non-monotonically; fall back to the
        // closest grid point
        tt = grid[best_idx];
    } else {
        const double a = cal.achieved_levels[k], b = cal.achieved_levels[k + 1];
        tt = (b > a) ? grid[k] + (target - a) * (grid[k + 1] - grid[k]) / (b - a) : grid[k];
    }
    tt = std::clamp(tt, 1e-9, 1.0 - 1e-9);
    cal.selected_tau_tilde = tt;
    FrontierFit fit = fit_expectile(dataset, tt, estimator, &cache);
    return {std::move(cal), std::move(fit)};
}

std::pair<ExpectileCalibration, FrontierFit> calibrate_expectile_coarse_refined(
    const Dataset& dataset, QuantileLevel target_tau, ExpectileEstimator estimator) {
    auto [coarse, coarse_fit] = calibrate_expectile(dataset, target_tau, coarse_expectile_grid(),
                                                    CalibrationMethod::EfronCount, estimator);
    const double center = coarse.selected_tau_tilde;
    std::vector<double> local;
    for (int k = -10; k <= 10; ++k) {
        const double v = center + 0.001 * k;
        if (v > 1e-4 && v < 1.0 - 1e-4) local.push_back(v);
    }
    return calibrate_expectile(dataset, target_tau, local, CalibrationMethod::EfronCount,
                               estimator);
}

std::vector<double> default_expectile_grid() {
    std::vector<double> g;
    g.reserve(999);
    for (int k = 1; k <= 999; ++k) g.push_back(static_cast<double>(k) / 1000.0);
    return g;
}

std::vector<double> coarse_expectile_grid() {
    std::vector<double> g;
    g.reserve(99);
    for (int k = 1; k <= 99; ++k) g.push_back(static_cast<double>(k) / 100.0);
    return g;
}

} // namespace qfr
