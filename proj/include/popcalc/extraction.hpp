#pragma once

// Differential-route recovery of the three densities of a sequence
// distribution from its expectation functional, treated as a polynomial in
// the test-function values: ordered probabilities from slot-wise partial
// differentials at w = 0, the permutation-summed density from total
// differentials at w = 0, and factorial moments from total differentials at
// w = 1. Cross-checks the direct combinatorial formulas in process-core.

#include "popcalc/polynomial.hpp"
#include "popcalc/sequence_dist.hpp"

namespace popcalc {

// E[prod_i w(X_i)] as a polynomial in the S test-function values
Polynomial<double> expectation_polynomial(const SequenceDist& d);

// per-slot form over n_max * S variables; slot i owns the variable block
// [i*S, (i+1)*S)
Polynomial<double> slot_expectation_polynomial(const SequenceDist& d);

// slot-partial differentials of the per-slot polynomial at w = 0
double extract_probability(const SequenceDist& d, const Tuple& query);
// total differentials of the single-w polynomial at w = 0
double extract_janossy(const SequenceDist& d, const Tuple& query);
// total differentials of the single-w polynomial at w = 1
double extract_moment(const SequenceDist& d, const Tuple& query);

}  // namespace popcalc
