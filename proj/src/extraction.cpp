#include "popcalc/extraction.hpp"

#include <algorithm>

#include "popcalc/calculus.hpp"

namespace popcalc {

Polynomial<double> expectation_polynomial(const SequenceDist& d) {
    const int s = d.space().size();
    Polynomial<double> p(s);
    for (int n = 0; n <= d.n_max(); ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            const double c = d.weights(n)[static_cast<Eigen::Index>(idx++)];
            if (c == 0.0) continue;
            Monomial m;
            for (int i = 0; i < n; ++i) {
                const int var = t[static_cast<std::size_t>(i)];
                bool merged = false;
                for (auto& [v, e] : m)
                    if (v == var) {
                        ++e;
                        merged = true;
                        break;
                    }
                if (!merged) m.emplace_back(var, 1);
            }
            std::sort(m.begin(), m.end());
            p.add_term(std::move(m), c);
        } while (n > 0 && next_tuple(s, t));
    }
    return p;
}

Polynomial<double> slot_expectation_polynomial(const SequenceDist& d) {
    const int s = d.space().size();
    Polynomial<double> p(d.n_max() * s == 0 ? 1 : d.n_max() * s);
    for (int n = 0; n <= d.n_max(); ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            const double c = d.weights(n)[static_cast<Eigen::Index>(idx++)];
            if (c == 0.0) continue;
            Monomial m;
            for (int i = 0; i < n; ++i) m.emplace_back(i * s + t[static_cast<std::size_t>(i)], 1);
            p.add_term(std::move(m), c);
        } while (n > 0 && next_tuple(s, t));
    }
    return p;
}

namespace {

PolyFunctional as_functional(Polynomial<double> p, int in_dim) {
    PolyFunctional f;
    f.in_dim = in_dim;
    f.components.push_back(std::move(p));
    return f;
}

Eigen::VectorXd indicator(int dim, int at) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[at] = 1.0;
    return v;
}

}  // namespace

double extract_probability(const SequenceDist& d, const Tuple& query) {
    const int s = d.space().size();
    const int k = static_cast<int>(query.size());
    if (k > d.n_max()) return 0.0;
    const int dim = std::max(1, d.n_max() * s);
    const auto f = as_functional(slot_expectation_polynomial(d), dim);
    DirectionSet dirs;
    for (int i = 0; i < k; ++i)
        dirs.push_back(indicator(dim, i * s + query[static_cast<std::size_t>(i)]));
    return analytic_differential(f, Eigen::VectorXd::Zero(dim), dirs)[0];
}

double extract_janossy(const SequenceDist& d, const Tuple& query) {
    const int s = d.space().size();
    const auto f = as_functional(expectation_polynomial(d), s);
    DirectionSet dirs;
    for (int q : query) dirs.push_back(indicator(s, q));
    return analytic_differential(f, Eigen::VectorXd::Zero(s), dirs)[0];
}

double extract_moment(const SequenceDist& d, const Tuple& query) {
    const int s = d.space().size();
    const auto f = as_functional(expectation_polynomial(d), s);
    DirectionSet dirs;
    for (int q : query) dirs.push_back(indicator(s, q));
    return analytic_differential(f, Eigen::VectorXd::Ones(s), dirs)[0];
}

}  // namespace popcalc
