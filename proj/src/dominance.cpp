#include "qfr/dominance.hpp"

namespace qfr {

DominanceMatrix dominance_matrix(const Dataset& dataset) {
    const std::size_t n = dataset.n();
    DominanceMatrix P(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < n; ++h)
            P.set(i, h, dataset.dominates(i, h));
    return P;
}

void validate_dominance(const DominanceMatrix& P, std::size_t n) {
    if (P.n() != n)
        throw DimensionError("dominance matrix size " + std::to_string(P.n()) +
                             " does not match n = " + std::to_string(n));
    if (!P.is_reflexive()) throw DomainError("dominance matrix must be reflexive");
    if (!P.is_transitive()) throw DomainError("dominance matrix must be transitive");
}

} // namespace qfr
