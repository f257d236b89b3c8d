#pragma once

#include <span>
#include <vector>

#include "qfr/math_program.hpp"
#include "qfr/types.hpp"

namespace qfr {

/// Binding Afriat pairs carried from one fit to a related one (same data,
/// different level). Purely a warm-start hint; results do not depend on it.
struct AfriatCache {
    std::vector<std::pair<int, int>> pairs;
};

/// Assembles the convex quantile regression LP: per observation an intercept,
/// d nonnegative slopes and the split residuals; the check-loss objective;
/// one equality per observation; and the full n^2 block of Afriat concavity
/// rows (the i == h rows are vacuous and kept for the record).
MathProgram build_cqr_program(const Dataset& dataset, QuantileLevel tau);

/// Same constraint set with the asymmetric least-squares objective.
MathProgram build_cer_program(const Dataset& dataset, QuantileLevel tau_tilde);

FrontierFit fit_cqr(const Dataset& dataset, QuantileLevel tau, AfriatCache* cache = nullptr);
FrontierFit fit_cer(const Dataset& dataset, QuantileLevel tau_tilde, AfriatCache* cache = nullptr);

/// CQR at several tau on the same data, sharing the working basis across the
/// sweep; equivalent to calling fit_cqr per level.
std::vector<FrontierFit> fit_cqr_multi(const Dataset& dataset,
                                       const std::vector<QuantileLevel>& taus);

/// Residual counts above the threshold plus the expectile ratio.
PropertyReport check_properties(const FrontierFit& fit, double threshold);

/// Lower envelope of the fitted hyperplanes, min_h alpha_h + beta_h'x; the
/// prediction rule for the globally concave fits (CQR/CER). Step-function
/// fits are served by predict_step.
double predict(const FrontierFit& fit, std::span<const double> x);

namespace detail_estimators {

/// Index helpers shared by the convex and isotonic builders.
struct VarLayout {
    int n = 0, d = 0;
    int alpha(int i) const { return i; }
    int beta(int i, int k) const { return n + i * d + k; }
    int eps_pos(int i) const { return n + n * d + i; }
    int eps_neg(int i) const { return n + n * d + n + i; }
    int total() const { return n * (d + 3); }
};

/// The gated program builder behind all four regression estimators.
/// `pairs` receives the (i,h) owning each Afriat row, aligned with row
/// indices n..n+pairs.size().
MathProgram build_regression_program(const Dataset& dataset, double level, bool quadratic,
                                     const DominanceMatrix* gate,
                                     std::vector<std::pair<int, int>>* pairs);

FrontierFit extract_fit(const Dataset& dataset, Method method, QuantileLevel level,
                        const SolveResult& sol);

/// Afriat pairs between lexicographically adjacent observations; a cheap but
/// effective initial working set for the row-activation solver.
std::vector<std::pair<int, int>> neighbor_seed_pairs(const Dataset& dataset);

SolveOptions make_options(const Dataset& dataset, const std::vector<std::pair<int, int>>& pairs,
                          const AfriatCache* cache);

FrontierFit fit_regression(const Dataset& dataset, Method method, QuantileLevel level,
                           const DominanceMatrix* gate, AfriatCache* cache);

} // namespace detail_estimators
} // namespace qfr
