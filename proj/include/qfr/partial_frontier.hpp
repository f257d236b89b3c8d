#pragma once

#include <span>
#include <vector>

#include "qfr/types.hpp"

namespace qfr {

/// Output-oriented VRS efficiency of one point against a reference set:
/// theta >= 1 scales the point's output onto the convex hull frontier.
struct DeaScore {
    double theta = 1.0;
    std::vector<double> intensities; // lambda, >= 0, sums to 1
};

/// Order-alpha partial frontier: for each observation the inf of the
/// conditional empirical quantile, i.e. the ceil(tau*N_i)-th smallest output
/// among the observations it dominates (itself included).
FrontierFit fit_order_alpha(const Dataset& dataset, QuantileLevel tau);

/// The same order statistic evaluated at an arbitrary input point. The
/// conditioning set {j : x_j <= x} must be nonempty.
double predict_order_alpha(const Dataset& dataset, QuantileLevel tau, std::span<const double> x);

/// Free disposal hull frontier: the tau -> 1 limit of order-alpha.
FrontierFit fit_fdh(const Dataset& dataset);

/// Output-oriented DEA under variable returns to scale, one LP per point:
/// max theta s.t. theta*y_i <= sum lambda_j y_j, sum lambda_j x_j <= x_i,
/// sum lambda_j = 1, lambda >= 0. Requires y_i > 0.
std::vector<DeaScore> dea_vrs_output(const Matrix& points_x, const std::vector<double>& points_y);

/// Value of the VRS output hull max{sum lambda_j y_j : sum lambda_j x_j <= q,
/// sum lambda_j = 1, lambda >= 0} at a query input q; the hull is translation
/// equivariant in y. Throws DomainError when no convex combination of the
/// reference inputs fits under q.
double dea_hull_value(const Matrix& points_x, const std::vector<double>& points_y,
                      std::span<const double> q);

/// Two-step convexified order-alpha: order-alpha fitted values, then the
/// DEA-VRS expansion theta_i times the step-one value. Nonpositive step-one
/// fitted values make the output-oriented ratio meaningless and raise
/// DomainError; callers may shift outputs (the hull value itself is
/// translation equivariant).
FrontierFit fit_convexified_order_alpha(const Dataset& dataset, QuantileLevel tau);

/// Tests both Theorem-1(i)-style counting inequalities on a fitted frontier:
/// true iff #(y above fit)/n > 1-tau or #(y below fit)/n > tau, counting
/// deviations strictly larger than the threshold.
bool violation_flag(const Dataset& dataset, const FrontierFit& fit, QuantileLevel tau,
                    double threshold);

namespace detail_frontier {
/// ceil(tau*N) under the exact-decimal reading of tau, clamped to [1, N].
int order_stat_index(double tau, int N);
} // namespace detail_frontier

} // namespace qfr
