#pragma once

#include <span>

#include "qfr/quantile_estimators.hpp"
#include "qfr/types.hpp"

namespace qfr {

/// Isotonic CQR: the CQR program with each Afriat row (i,h) kept only when
/// p_ih = 1 (rows gated away are vacuous). P defaults to the componentwise
/// dominance order of the data; a user-supplied P must be reflexive and
/// transitive.
FrontierFit fit_icqr(const Dataset& dataset, QuantileLevel tau,
                     const DominanceMatrix* P = nullptr, AfriatCache* cache = nullptr);

/// Isotonic CER: same gating with the asymmetric least-squares objective.
FrontierFit fit_icer(const Dataset& dataset, QuantileLevel tau_tilde,
                     const DominanceMatrix* P = nullptr, AfriatCache* cache = nullptr);

/// ICQR at several tau on the same data, sharing the working basis.
std::vector<FrontierFit> fit_icqr_multi(const Dataset& dataset,
                                        const std::vector<QuantileLevel>& taus,
                                        const DominanceMatrix* P = nullptr);

/// The step-function prediction rule for isotonic fits:
/// max{fitted_i : x_i <= x componentwise}, and min_i fitted_i below the data
/// (floor convention).
double predict_step(const FrontierFit& fit, const Dataset& dataset, std::span<const double> x);

} // namespace qfr
