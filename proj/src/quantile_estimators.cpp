#include "qfr/quantile_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qfr/dominance.hpp"

namespace qfr {
namespace detail_estimators {

MathProgram build_regression_program(const Dataset& dataset, double level, bool quadratic,
                                     const DominanceMatrix* gate,
                                     std::vector<std::pair<int, int>>* pairs) {
    const int n = static_cast<int>(dataset.n());
    const int d = static_cast<int>(dataset.d());
    const VarLayout L{n, d};

    MathProgram p;
    for (int i = 0; i < n; ++i) p.add_variable(-kInf, kInf, 0.0); // alpha
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) p.add_variable(0.0, kInf, 0.0); // beta
    for (int i = 0; i < n; ++i)
        p.add_variable(0.0, kInf, quadratic ? 0.0 : level); // eps+
    for (int i = 0; i < n; ++i)
        p.add_variable(0.0, kInf, quadratic ? 0.0 : 1.0 - level); // eps-
    if (quadratic) {
        for (int i = 0; i < n; ++i) {
            p.set_quadratic_diag(L.eps_pos(i), 2.0 * level);
            p.set_quadratic_diag(L.eps_neg(i), 2.0 * (1.0 - level));
        }
    }

    // y_i = alpha_i + beta_i'x_i + eps+_i - eps-_i
    for (int i = 0; i < n; ++i) {
        std::vector<int> idx;
        std::vector<double> val;
        idx.reserve(d + 3);
        val.reserve(d + 3);
        idx.push_back(L.alpha(i));
        val.push_back(1.0);
        for (int k = 0; k < d; ++k) {
            idx.push_back(L.beta(i, k));
            val.push_back(dataset.x(i, k));
        }
        idx.push_back(L.eps_pos(i));
        val.push_back(1.0);
        idx.push_back(L.eps_neg(i));
        val.push_back(-1.0);
        p.add_row(std::move(idx), std::move(val), RowSense::Equal, dataset.y(i));
    }

    // Afriat rows: alpha_i + beta_i'x_i <= alpha_h + beta_h'x_i, gated by P
    for (int i = 0; i < n; ++i) {
        for (int h = 0; h < n; ++h) {
            if (gate && !gate->at(i, h)) continue;
            if (pairs) pairs->emplace_back(i, h);
            if (i == h) {
                p.add_row({}, {}, RowSense::LessEq, 0.0); // vacuous self-comparison
                continue;
            }
            std::vector<int> idx;
            std::vector<double> val;
            idx.reserve(2 * (d + 1));
            val.reserve(2 * (d + 1));
            idx.push_back(L.alpha(i));
            val.push_back(1.0);
            for (int k = 0; k < d; ++k) {
                idx.push_back(L.beta(i, k));
                val.push_back(dataset.x(i, k));
            }
            idx.push_back(L.alpha(h));
            val.push_back(-1.0);
            for (int k = 0; k < d; ++k) {
                idx.push_back(L.beta(h, k));
                val.push_back(-dataset.x(i, k));
            }
            p.add_row(std::move(idx), std::move(val), RowSense::LessEq, 0.0);
        }
    }
    return p;
}

FrontierFit extract_fit(const Dataset& dataset, Method method, QuantileLevel level,
                        const SolveResult& sol) {
    const int n = static_cast<int>(dataset.n());
    const int d = static_cast<int>(dataset.d());
    const VarLayout L{n, d};

    FrontierFit fit{method, level, std::vector<double>(n), Matrix(n, d),
                    std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                    sol.objective};
    auto& alpha = *fit.intercepts;
    auto& beta = *fit.slopes;
    for (int i = 0; i < n; ++i) {
        alpha[i] = sol.x[L.alpha(i)];
        double fitted = alpha[i];
        for (int k = 0; k < d; ++k) {
            beta(i, k) = sol.x[L.beta(i, k)];
            fitted += beta(i, k) * dataset.x(i, k);
        }
        fit.fitted[i] = fitted;
        // the split residuals are structurally nonnegative; sub-tolerance
        // negatives are solver roundoff
        fit.residual_pos[i] = std::max(0.0, sol.x[L.eps_pos(i)]);
        fit.residual_neg[i] = std::max(0.0, sol.x[L.eps_neg(i)]);
    }
    return fit;
}

std::vector<std::pair<int, int>> neighbor_seed_pairs(const Dataset& dataset) {
    const int n = static_cast<int>(dataset.n());
    const int d = static_cast<int>(dataset.d());
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int k = 0; k < d; ++k) {
            if (dataset.x(a, k) < dataset.x(b, k)) return true;
            if (dataset.x(a, k) > dataset.x(b, k)) return false;
        }
        return a < b;
    });
    pairs.reserve(4 * static_cast<std::size_t>(n));
    for (int k = 0; k + 1 < n; ++k) {
        pairs.emplace_back(order[k], order[k + 1]);
        pairs.emplace_back(order[k + 1], order[k]);
        if (k + 2 < n) {
            pairs.emplace_back(order[k], order[k + 2]);
            pairs.emplace_back(order[k + 2], order[k]);
        }
    }
    if (d >= 2) {
        // the binding Afriat rows in higher dimension concentrate among
        // geometric neighbors, which a lexicographic chain misses
        const int kk = std::min(n - 1, 6);
        std::vector<std::pair<double, int>> dist(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double diff = dataset.x(i, c) - dataset.x(j, c);
                    s += diff * diff;
                }
                dist[j] = {j == i ? kInf : s, j};
            }
            std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
            for (int t = 0; t < kk; ++t) {
                pairs.emplace_back(i, dist[t].second);
                pairs.emplace_back(dist[t].second, i);
            }
        }
    }
    return pairs;
}

namespace {

// maps (i,h) -> program row index for the pair list emitted by the builder
std::vector<int> pair_row_lookup(const std::vector<std::pair<int, int>>& pairs, int n) {
    std::vector<int> lut(static_cast<std::size_t>(n) * n, -1);
    for (std::size_t r = 0; r < pairs.size(); ++r)
        lut[static_cast<std::size_t>(pairs[r].first) * n + pairs[r].second] =
            n + static_cast<int>(r);
    return lut;
}

} // namespace

SolveOptions make_options(const Dataset& dataset, const std::vector<std::pair<int, int>>& pairs,
                          const AfriatCache* cache) {
    const int n = static_cast<int>(dataset.n());
    SolveOptions opt;
    const auto lut = pair_row_lookup(pairs, n);
    auto push = [&](const std::vector<std::pair<int, int>>& seed) {
        for (const auto& [i, h] : seed) {
            const int row = lut[static_cast<std::size_t>(i) * n + h];
            if (row >= 0) opt.seed_rows.push_back(row);
        }
    };
    push(detail_estimators::neighbor_seed_pairs(dataset));
    if (cache) push(cache->pairs);
    return opt;
}

namespace {
void store_cache(AfriatCache* cache, const std::vector<std::pair<int, int>>& pairs, int n,
                 const SolveResult& sol) {
    if (!cache) return;
    cache->pairs.clear();
    for (int row : sol.active_rows) {
        const int r = row - n;
        if (r >= 0 && r < static_cast<int>(pairs.size())) cache->pairs.push_back(pairs[r]);
    }
}

} // namespace

FrontierFit fit_regression(const Dataset& dataset, Method method, QuantileLevel level,
                           const DominanceMatrix* gate, AfriatCache* cache) {
    const int n = static_cast<int>(dataset.n());
    std::vector<std::pair<int, int>> pairs;
    const bool quadratic = (method == Method::CER || method == Method::ICER);
    const MathProgram p = detail_estimators::build_regression_program(
        dataset, level.value(), quadratic, gate, &pairs);
    const SolveOptions opt = make_options(dataset, pairs, cache);
    const SolveResult sol = quadratic ? solve_qp(p, opt) : solve_lp(p, opt);
    if (sol.status != SolveStatus::Optimal)
        throw EstimationError(std::string(method_name(method)) + " estimation failed: solver status " +
                              status_name(sol.status));
    store_cache(cache, pairs, n, sol);
    return detail_estimators::extract_fit(dataset, method, level, sol);
}

} // namespace detail_estimators

MathProgram build_cqr_program(const Dataset& dataset, QuantileLevel tau) {
    if (!tau.is_quantile()) throw DomainError("build_cqr_program expects a quantile level");
    return detail_estimators::build_regression_program(dataset, tau.value(), false, nullptr,
                                                       nullptr);
}

MathProgram build_cer_program(const Dataset& dataset, QuantileLevel tau_tilde) {
    if (!tau_tilde.is_expectile()) throw DomainError("build_cer_program expects an expectile level");
    return detail_estimators::build_regression_program(dataset, tau_tilde.value(), true, nullptr,
                                                       nullptr);
}

FrontierFit fit_cqr(const Dataset& dataset, QuantileLevel tau, AfriatCache* cache) {
    if (!tau.is_quantile()) throw DomainError("fit_cqr expects a quantile level");
    return detail_estimators::fit_regression(dataset, Method::CQR, tau, nullptr, cache);
}

FrontierFit fit_cer(const Dataset& dataset, QuantileLevel tau_tilde, AfriatCache* cache) {
    if (!tau_tilde.is_expectile()) throw DomainError("fit_cer expects an expectile level");
    return detail_estimators::fit_regression(dataset, Method::CER, tau_tilde, nullptr, cache);
}

std::vector<FrontierFit> fit_cqr_multi(const Dataset& dataset,
                                       const std::vector<QuantileLevel>& taus) {
    using namespace detail_estimators;
    const int n = static_cast<int>(dataset.n());
    const VarLayout L{n, static_cast<int>(dataset.d())};
    std::vector<std::pair<int, int>> pairs;
    MathProgram p = build_regression_program(dataset, 0.5, false, nullptr, &pairs);
    const SolveOptions opt = make_options(dataset, pairs, nullptr);
    LpReoptimizer reopt(p, opt);

    std::vector<FrontierFit> fits;
    fits.reserve(taus.size());
    std::vector<double> cost(p.num_vars(), 0.0);
    for (const QuantileLevel& tau : taus) {
        if (!tau.is_quantile()) throw DomainError("fit_cqr_multi expects quantile levels");
        for (int i = 0; i < n; ++i) {
            cost[L.eps_pos(i)] = tau.value();
            cost[L.eps_neg(i)] = 1.0 - tau.value();
        }
        const SolveResult sol = reopt.solve_with_costs(cost);
        if (sol.status != SolveStatus::Optimal)
            throw EstimationError(std::string("cqr estimation failed: solver status ") +
                                  status_name(sol.status));
        fits.push_back(extract_fit(dataset, Method::CQR, tau, sol));
    }
    return fits;
}

PropertyReport check_properties(const FrontierFit& fit, double threshold) {
    if (!is_regression_method(fit.method))
        throw DomainError("check_properties expects a regression fit");
    PropertyReport rep;
    const std::size_t n = fit.n();
    double sum_pos = 0.0, sum_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (fit.residual_pos[i] > threshold) ++rep.n_pos;
        if (fit.residual_neg[i] > threshold) ++rep.n_neg;
        sum_pos += fit.residual_pos[i];
        sum_neg += fit.residual_neg[i];
    }
    rep.pos_share = static_cast<double>(rep.n_pos) / static_cast<double>(n);
    rep.neg_share = static_cast<double>(rep.n_neg) / static_cast<double>(n);
    rep.ratio_defined = (sum_pos + sum_neg) > 0.0;
    rep.expectile_ratio = rep.ratio_defined ? sum_neg / (sum_pos + sum_neg) : 0.0;
    return rep;
}

double predict(const FrontierFit& fit, std::span<const double> x) {
    if (!fit.has_hyperplanes())
        throw DomainError("predict requires a fit with intercepts and slopes");
    if (fit.method == Method::ICQR || fit.method == Method::ICER)
        throw DomainError("isotonic fits are step functions; use predict_step");
    const auto& alpha = *fit.intercepts;
    const auto& beta = *fit.slopes;
    if (x.size() != beta.cols()) throw DimensionError("query dimension does not match the fit");
    double best = kInf;
    for (std::size_t h = 0; h < fit.n(); ++h) {
        double v = alpha[h];
        for (std::size_t k = 0; k < beta.cols(); ++k) v += beta(h, k) * x[k];
        best = std::min(best, v);
    }
    return best;
}

} // namespace qfr
