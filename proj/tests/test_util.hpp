#pragma once

// Shared helpers for deterministic random test inputs.

#include <Eigen/Dense>
#include <vector>

#include "popcalc/polynomial.hpp"
#include "popcalc/rng.hpp"
#include "popcalc/sequence_dist.hpp"

namespace testutil {

// Sparse polynomial with small integer coefficients; exactly representable in
// doubles so symbolic reference computations stay exact.
inline popcalc::Polynomial<double> random_polynomial(popcalc::CounterRng& rng, int dim,
                                                     int max_degree, int max_terms) {
    popcalc::Polynomial<double> p(dim);
    const int terms = rng.uniform_int(1, max_terms);
    for (int t = 0; t < terms; ++t) {
        popcalc::Monomial m;
        int budget = rng.uniform_int(0, max_degree);
        for (int v = 0; v < dim && budget > 0; ++v) {
            const int e = rng.uniform_int(0, budget);
            if (e > 0) m.emplace_back(v, e);
            budget -= e;
        }
        int c = rng.uniform_int(-3, 3);
        if (c == 0) c = 1;
        p.add_term(std::move(m), static_cast<double>(c));
    }
    return p;
}

inline popcalc::PolyFunctional random_poly_map(popcalc::CounterRng& rng, int in_dim, int out_dim,
                                               int max_degree, int max_terms) {
    popcalc::PolyFunctional f;
    f.in_dim = in_dim;
    for (int c = 0; c < out_dim; ++c)
        f.components.push_back(random_polynomial(rng, in_dim, max_degree, max_terms));
    return f;
}

inline Eigen::VectorXd random_int_vector(popcalc::CounterRng& rng, int dim, int lo = -2,
                                         int hi = 2) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform_int(lo, hi);
    return v;
}

// strictly positive weights summing to one
inline Eigen::ArrayXd random_simplex(popcalc::CounterRng& rng, int n) {
    Eigen::ArrayXd w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.05 + rng.uniform01();
    return w / w.sum();
}

// dense random process with strictly positive weights on every tuple
inline popcalc::SequenceDist random_sequence_dist(popcalc::CounterRng& rng,
                                                  const popcalc::DiscreteSpace& space, int n_max) {
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n_max) + 1);
    double total = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        auto& arr = w[static_cast<std::size_t>(n)];
        arr.resize(static_cast<Eigen::Index>(popcalc::tuple_count(space.size(), n)));
        for (Eigen::Index i = 0; i < arr.size(); ++i) arr[i] = 0.05 + rng.uniform01();
        total += arr.sum();
    }
    for (auto& arr : w) arr /= total;
    return popcalc::SequenceDist(space, std::move(w));
}

}  // namespace testutil
