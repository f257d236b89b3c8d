#include "qfr/partial_frontier.hpp"

#include <algorithm>
#include <cmath>

#include "qfr/math_program.hpp"

namespace qfr {

namespace detail_frontier {

int order_stat_index(double tau, int N) {
    const int k = static_cast<int>(std::ceil(tau * static_cast<double>(N) - 1e-9));
    return std::clamp(k, 1, N);
}

} // namespace detail_frontier

namespace {

// outputs of the observations dominated by x (componentwise), in data order
std::vector<double> dominated_outputs(const Dataset& dataset, std::span<const double> x) {
    std::vector<double> s;
    for (std::size_t j = 0; j < dataset.n(); ++j) {
        bool dom = true;
        for (std::size_t k = 0; k < dataset.d(); ++k)
            if (dataset.x(j, k) > x[k]) {
                dom = false;
                break;
            }
        if (dom) s.push_back(dataset.y(j));
    }
    return s;
}

double kth_smallest(std::vector<double> v, int k) {
    std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
    return v[static_cast<std::size_t>(k - 1)];
}

FrontierFit order_alpha_impl(const Dataset& dataset, QuantileLevel tau, Method method) {
    const std::size_t n = dataset.n();
    FrontierFit fit{method, tau, std::nullopt, std::nullopt, std::vector<double>(n), {}, {}, 0.0};
    std::vector<double> xi(dataset.d());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dataset.d(); ++k) xi[k] = dataset.x(i, k);
        std::vector<double> s = dominated_outputs(dataset, xi);
        const int k = detail_frontier::order_stat_index(tau.value(), static_cast<int>(s.size()));
        fit.fitted[i] = kth_smallest(std::move(s), k);
    }
    return fit;
}

MathProgram dea_program(const Matrix& px, const std::vector<double>& py, std::span<const double> qx,
                        double y_target, bool maximize_output) {
    const int n = static_cast<int>(py.size());
    const int d = static_cast<int>(px.cols());
    MathProgram p;
    int theta = -1;
    if (maximize_output) theta = p.add_variable(-kInf, kInf, -1.0); // max theta
    std::vector<int> lambda(n);
    for (int j = 0; j < n; ++j)
        lambda[j] = p.add_variable(0.0, kInf, maximize_output ? 0.0 : -py[static_cast<std::size_t>(j)]);

    if (maximize_output) {
        // theta*y_i - sum lambda_j y_j <= 0
        std::vector<int> idx{theta};
        std::vector<double> val{y_target};
        for (int j = 0; j < n; ++j) {
            idx.push_back(lambda[j]);
            val.push_back(-py[static_cast<std::size_t>(j)]);
        }
        p.add_row(std::move(idx), std::move(val), RowSense::LessEq, 0.0);
    }
    for (int k = 0; k < d; ++k) {
        std::vector<int> idx;
        std::vector<double> val;
        for (int j = 0; j < n; ++j) {
            idx.push_back(lambda[j]);
            val.push_back(px(static_cast<std::size_t>(j), static_cast<std::size_t>(k)));
        }
        p.add_row(std::move(idx), std::move(val), RowSense::LessEq, qx[k]);
    }
    {
        std::vector<int> idx;
        std::vector<double> val;
        for (int j = 0; j < n; ++j) {
            idx.push_back(lambda[j]);
            val.push_back(1.0);
        }
        p.add_row(std::move(idx), std::move(val), RowSense::Equal, 1.0);
    }
    return p;
}

} // namespace

FrontierFit fit_order_alpha(const Dataset& dataset, QuantileLevel tau) {
    if (!tau.is_quantile()) throw DomainError("fit_order_alpha expects a quantile level");
    return order_alpha_impl(dataset, tau, Method::OrderAlpha);
}

double predict_order_alpha(const Dataset& dataset, QuantileLevel tau, std::span<const double> x) {
    if (!tau.is_quantile()) throw DomainError("predict_order_alpha expects a quantile level");
    if (x.size() != dataset.d()) throw DimensionError("query dimension does not match the data");
    std::vector<double> s = dominated_outputs(dataset, x);
    if (s.empty())
        throw DomainError("no observation is dominated by the query point (F_X(x) = 0)");
    const int k = detail_frontier::order_stat_index(tau.value(), static_cast<int>(s.size()));
    return kth_smallest(std::move(s), k);
}

FrontierFit fit_fdh(const Dataset& dataset) {
    return order_alpha_impl(dataset, QuantileLevel::quantile(1.0 - 1e-12), Method::FDH);
}

std::vector<DeaScore> dea_vrs_output(const Matrix& points_x, const std::vector<double>& points_y) {
    const std::size_t n = points_y.size();
    if (n == 0 || points_x.rows() != n) throw DimensionError("dea_vrs_output size mismatch");
    std::vector<DeaScore> scores(n);
    std::vector<double> q(points_x.cols());
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points_y[i] > 0.0))
            throw DomainError("dea_vrs_output requires positive outputs (observation " +
                              std::to_string(i + 1) + ")");
        for (std::size_t k = 0; k < points_x.cols(); ++k) q[k] = points_x(i, k);
        const MathProgram p = dea_program(points_x, points_y, q, points_y[i], true);
        const SolveResult sol = solve_lp(p);
        if (sol.status != SolveStatus::Optimal)
            throw EstimationError(std::string("DEA solve failed: status ") +
                                  status_name(sol.status));
        scores[i].theta = sol.x[0];
        scores[i].intensities.assign(sol.x.begin() + 1, sol.x.end());
    }
    return scores;
}

double dea_hull_value(const Matrix& points_x, const std::vector<double>& points_y,
                      std::span<const double> q) {
    if (q.size() != points_x.cols()) throw DimensionError("query dimension mismatch");
    const MathProgram p = dea_program(points_x, points_y, q, 0.0, false);
    const SolveResult sol = solve_lp(p);
    if (sol.status == SolveStatus::Infeasible)
        throw DomainError("query input is below every convex combination of the data");
    if (sol.status != SolveStatus::Optimal)
        throw EstimationError(std::string("DEA hull solve failed: status ") +
                              status_name(sol.status));
    return -sol.objective;
}

FrontierFit fit_convexified_order_alpha(const Dataset& dataset, QuantileLevel tau) {
    FrontierFit step1 = fit_order_alpha(dataset, tau);
    for (std::size_t i = 0; i < step1.n(); ++i)
        if (!(step1.fitted[i] > 0.0))
            throw DomainError(
                "convexified order-alpha needs positive order-alpha fitted values; shift the "
                "outputs (observation " + std::to_string(i + 1) + ")");
    const std::vector<DeaScore> scores = dea_vrs_output(dataset.inputs(), step1.fitted);
    FrontierFit fit = std::move(step1);
    fit.method = Method::ConvexifiedOrderAlpha;
    for (std::size_t i = 0; i < fit.n(); ++i) fit.fitted[i] *= scores[i].theta;
    return fit;
}

bool violation_flag(const Dataset& dataset, const FrontierFit& fit, QuantileLevel tau,
                    double threshold) {
    if (fit.fitted.size() != dataset.n())
        throw DimensionError("fit does not belong to this dataset");
    const double n = static_cast<double>(dataset.n());
    std::size_t above = 0, below = 0;
    for (std::size_t i = 0; i < dataset.n(); ++i) {
        const double diff = dataset.y(i) - fit.fitted[i];
        if (diff > threshold) ++above;
        if (-diff > threshold) ++below;
    }
    const double t = tau.value();
    return (static_cast<double>(above) / n > 1.0 - t + 1e-12) ||
           (static_cast<double>(below) / n > t + 1e-12);
}

} // namespace qfr
