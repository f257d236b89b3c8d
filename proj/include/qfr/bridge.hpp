#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qfr/types.hpp"

namespace qfr {

enum class ErrorKind : std::uint8_t {
    NoiseOnly,        // eps = v,  v ~ N(0, sigma_v^2)
    InefficiencyOnly, // eps = -u, u ~ |N(0, sigma_u^2)|
    Composite,        // eps = v - u
};

/// Error-term specification of the production model. The composite density is
/// the skewed normal-minus-half-normal law (2/sigma) phi(e/sigma) Phi(-e*lambda/sigma)
/// with sigma^2 = sigma_u^2 + sigma_v^2 and lambda = sigma_u / sigma_v.
struct ErrorSpec {
    ErrorKind kind;
    double sigma_v = 0.0;
    double sigma_u = 0.0;

    static ErrorSpec noise_only(double sigma_v);
    static ErrorSpec inefficiency_only(double sigma_u);
    static ErrorSpec composite(double sigma_v, double sigma_u);

    double density(double e) const;
    /// Truncation bounds outside which the density mass is negligible.
    std::pair<double, double> support_bounds() const;
};

/// Inverse CDF of the error term at quantile tau. Closed forms for the pure
/// specifications, bracketed numerical inversion of the integrated density
/// for the composite one (absolute tolerance 1e-8).
double error_quantile(const ErrorSpec& spec, QuantileLevel tau);

/// The quantile -> expectile mapping through lower/upper partial moments:
/// tau-tilde = LPM / (LPM - UPM) evaluated at q_tau by adaptive quadrature.
double theoretical_expectile_of_quantile(const ErrorSpec& spec, QuantileLevel tau);

/// Numerical inverse of the mapping above.
double quantile_of_theoretical_expectile(const ErrorSpec& spec, QuantileLevel tau_tilde);

/// Share of observations with residual_neg above the threshold; the Efron
/// count of the quantile level a fit achieves.
double empirical_quantile_level(const FrontierFit& fit, double threshold);

enum class CalibrationMethod : std::uint8_t { EfronCount, WaltrupInterpolate };
enum class ExpectileEstimator : std::uint8_t { CER, ICER };

struct ExpectileCalibration {
    double target_tau = 0.0;
    std::vector<double> grid;
    std::vector<double> achieved_levels;
    double selected_tau_tilde = 0.0;
    CalibrationMethod method = CalibrationMethod::EfronCount;
};

/// Fits the expectile estimator at every grid level, measures the achieved
/// quantile level of each fit, and selects the expectile whose level matches
/// the target quantile: the closest grid point (Efron count, ties to the
/// smaller level) or a linear interpolation between the bracketing grid
/// points followed by one refit (Waltrup).
std::pair<ExpectileCalibration, FrontierFit> calibrate_expectile(
    const Dataset& dataset, QuantileLevel target_tau, const std::vector<double>& grid,
    CalibrationMethod method, ExpectileEstimator estimator);

/// Two-stage search: Efron count on the coarse 0.01 grid, then on a local
/// 0.001 grid around the winner. Tracks the full-grid selection to within two
/// fine steps at a fraction of the fits.
std::pair<ExpectileCalibration, FrontierFit> calibrate_expectile_coarse_refined(
    const Dataset& dataset, QuantileLevel target_tau, ExpectileEstimator estimator);

/// 0.001, 0.002, ..., 0.999.
std::vector<double> default_expectile_grid();
/// 0.01 steps, for the simulation harness.
std::vector<double> coarse_expectile_grid();

} // namespace qfr
