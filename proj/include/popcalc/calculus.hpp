#pragma once

// Chain differentials of polynomial functionals: exact symbolic differentials,
// nested finite differences, the partition-sum chain rule for compositions,
// the total-equals-sum-of-partials decomposition, and the distinct-slot
// injection sums for multilinear maps.

#include <Eigen/Dense>
#include <vector>

#include "popcalc/polynomial.hpp"

namespace popcalc {

using DirectionSet = std::vector<Eigen::VectorXd>;

Eigen::VectorXd eval(const PolyFunctional& f, const Eigen::VectorXd& x);

// Exact n-th order mixed directional differential (n = dirs.size(), possibly 0).
// Symmetric in the directions and linear in each.
Eigen::VectorXd analytic_differential(const PolyFunctional& f, const Eigen::VectorXd& x,
                                      const DirectionSet& dirs);

// Nested forward differences with a single step for the whole stencil.
Eigen::VectorXd fd_differential(const PolyFunctional& f, const Eigen::VectorXd& x,
                                const DirectionSet& dirs, double step);

// n-th differential of f∘g at x via the partition sum over the direction set:
// each partition contributes the |pi|-th differential of f at g(x) taken in the
// directions xi_b = (differential of g over block b). Orders above 8 refused.
Eigen::VectorXd faa_di_bruno(const PolyFunctional& f, const PolyFunctional& g,
                             const Eigen::VectorXd& x, const DirectionSet& dirs);

// Reference value for the same quantity: compose symbolically, differentiate
// the composite, all in exact rational arithmetic (doubles are dyadic
// rationals, so the only rounding is the final conversion back).
Eigen::VectorXd composite_differential_reference(const PolyFunctional& f, const PolyFunctional& g,
                                                 const Eigen::VectorXd& x,
                                                 const DirectionSet& dirs);

// First-order decomposition for a scalar functional: the total differential in
// direction eta equals the sum over coordinates of the partial differentials
// (direction masked to one coordinate). Returns both sides.
struct TotalDecomposition {
    std::vector<double> partials;  // one per input coordinate
    double total = 0.0;
};
TotalDecomposition total_differential_decomposition(const PolyFunctional& f,
                                                    const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& direction);

// Differentials of a multilinear map F over n slots of equal width. A partial
// prefix differential substitutes directions into the first k slots; a total
// differential sums substitutions over all ordered injections of the k
// directions into distinct slots. Non-multilinear inputs are refused.
enum class MultilinearMode { PartialPrefix, Total };
double multilinear_differential(const PolyFunctional& F, int slot_width, MultilinearMode mode,
                                const std::vector<Eigen::VectorXd>& slot_points,
                                const DirectionSet& dirs);

}  // namespace popcalc
