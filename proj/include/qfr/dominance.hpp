#pragma once

#include "qfr/types.hpp"

namespace qfr {

/// Pairwise enumeration of the componentwise dominance order:
/// P(i,h) = 1 iff x_i <= x_h in every coordinate. Equal input vectors
/// dominate each other in both directions.
DominanceMatrix dominance_matrix(const Dataset& dataset);

/// Rejects a user-supplied matrix that is not reflexive and transitive or
/// whose size does not match n.
void validate_dominance(const DominanceMatrix& P, std::size_t n);

} // namespace qfr
