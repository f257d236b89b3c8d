#include "qfr/isotonic_estimators.hpp"

#include <algorithm>

#include "qfr/dominance.hpp"

namespace qfr {

namespace {

DominanceMatrix resolve_gate(const Dataset& dataset, const DominanceMatrix* P) {
    if (!P) return dominance_matrix(dataset);
    validate_dominance(*P, dataset.n());
    return *P;
}

} // namespace

FrontierFit fit_icqr(const Dataset& dataset, QuantileLevel tau, const DominanceMatrix* P,
                     AfriatCache* cache) {
    if (!tau.is_quantile()) throw DomainError("fit_icqr expects a quantile level");
    const DominanceMatrix gate = resolve_gate(dataset, P);
    return detail_estimators::fit_regression(dataset, Method::ICQR, tau, &gate, cache);
}

FrontierFit fit_icer(const Dataset& dataset, QuantileLevel tau_tilde, const DominanceMatrix* P,
                     AfriatCache* cache) {
    if (!tau_tilde.is_expectile()) throw DomainError("fit_icer expects an expectile level");
    const DominanceMatrix gate = resolve_gate(dataset, P);
    return detail_estimators::fit_regression(dataset, Method::ICER, tau_tilde, &gate, cache);
}

std::vector<FrontierFit> fit_icqr_multi(const Dataset& dataset,
                                        const std::vector<QuantileLevel>& taus,
                                        const DominanceMatrix* P) {
    using namespace detail_estimators;
    const DominanceMatrix gate = resolve_gate(dataset, P);
    const int n = static_cast<int>(dataset.n());
    const VarLayout L{n, static_cast<int>(dataset.d())};
    std::vector<std::pair<int, int>> pairs;
    MathProgram p = build_regression_program(dataset, 0.5, false, &gate, &pairs);
    const SolveOptions opt = make_options(dataset, pairs, nullptr);
    LpReoptimizer reopt(p, opt);

    std::vector<FrontierFit> fits;
    fits.reserve(taus.size());
    std::vector<double> cost(p.num_vars(), 0.0);
    for (const QuantileLevel& tau : taus) {
        if (!tau.is_quantile()) throw DomainError("fit_icqr_multi expects quantile levels");
        for (int i = 0; i < n; ++i) {
            cost[L.eps_pos(i)] = tau.value();
            cost[L.eps_neg(i)] = 1.0 - tau.value();
        }
        const SolveResult sol = reopt.solve_with_costs(cost);
        if (sol.status != SolveStatus::Optimal)
            throw EstimationError(std::string("icqr estimation failed: solver status ") +
                                  status_name(sol.status));
        fits.push_back(extract_fit(dataset, Method::ICQR, tau, sol));
    }
    return fits;
}

double predict_step(const FrontierFit& fit, const Dataset& dataset, std::span<const double> x) {
    if (x.size() != dataset.d()) throw DimensionError("query dimension does not match the data");
    if (fit.fitted.size() != dataset.n())
        throw DimensionError("fit does not belong to this dataset");
    bool any = false;
    double best = -kInf;
    for (std::size_t i = 0; i < dataset.n(); ++i) {
        bool dominated = true;
        for (std::size_t k = 0; k < dataset.d(); ++k)
            if (dataset.x(i, k) > x[k]) {
                dominated = false;
                break;
            }
        if (dominated) {
            any = true;
            best = std::max(best, fit.fitted[i]);
        }
    }
    if (any) return best;
    return *std::min_element(fit.fitted.begin(), fit.fitted.end()); // floor convention
}

} // namespace qfr
