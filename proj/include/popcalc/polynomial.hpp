#pragma once

// Sparse multivariate polynomials templated on the coefficient scalar. The
// double instantiation backs the public calculus API; an exact-rational
// instantiation backs the symbolic composition reference path.

#include <map>
#include <utility>
#include <vector>

#include "popcalc/errors.hpp"

namespace popcalc {

// Exponent list sorted by variable index, all exponents positive.
using Monomial = std::vector<std::pair<int, int>>;

template <typename Scalar>
class Polynomial {
public:
    explicit Polynomial(int dim = 0) : dim_(dim) {}

    int dim() const { return dim_; }
    const std::map<Monomial, Scalar>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Monomial m, const Scalar& c) {
        if (c == Scalar(0)) return;
        for (auto& [v, e] : m)
            if (v < 0 || v >= dim_ || e <= 0) throw DomainError("bad monomial term");
        auto [it, inserted] = terms_.emplace(std::move(m), c);
        if (!inserted) {
            it->second += c;
            if (it->second == Scalar(0)) terms_.erase(it);
        }
    }

    static Polynomial constant(int dim, const Scalar& c) {
        Polynomial p(dim);
        p.add_term({}, c);
        return p;
    }

    static Polynomial variable(int dim, int v) {
        Polynomial p(dim);
        p.add_term({{v, 1}}, Scalar(1));
        return p;
    }

    Scalar eval(const std::vector<Scalar>& x) const {
        if (static_cast<int>(x.size()) != dim_) throw DomainError("eval dimension mismatch");
        Scalar out(0);
        for (const auto& [m, c] : terms_) {
            Scalar t = c;
            for (const auto& [v, e] : m)
                for (int i = 0; i < e; ++i) t *= x[v];
            out += t;
        }
        return out;
    }

    Polynomial derivative(int var) const {
        Polynomial out(dim_);
        for (const auto& [m, c] : terms_) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i].first != var) continue;
                Monomial d = m;
                Scalar nc = c * Scalar(m[i].second);
                if (--d[i].second == 0) d.erase(d.begin() + static_cast<std::ptrdiff_t>(i));
                out.add_term(std::move(d), nc);
                break;
            }
        }
        return out;
    }

    // sum_v eta[v] * d/dx_v, with numeric eta folded into the coefficients
    Polynomial directional_derivative(const std::vector<Scalar>& eta) const {
        if (static_cast<int>(eta.size()) != dim_)
            throw DomainError("direction dimension mismatch");
        Polynomial out(dim_);
        for (int v = 0; v < dim_; ++v) {
            if (eta[v] == Scalar(0)) continue;
            out += derivative(v).scaled(eta[v]);
        }
        return out;
    }

    int total_degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) {
            int t = 0;
            for (const auto& [v, e] : m) t += e;
            d = std::max(d, t);
        }
        return d;
    }

    Polynomial scaled(const Scalar& s) const {
        Polynomial out(dim_);
        if (s == Scalar(0)) return out;
        for (const auto& [m, c] : terms_) out.add_term(m, c * s);
        return out;
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.dim_ != dim_) throw DomainError("polynomial dimension mismatch");
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial r = *this;
        r += o;
        return r;
    }

    Polynomial operator*(const Polynomial& o) const {
        if (o.dim_ != dim_) throw DomainError("polynomial dimension mismatch");
        Polynomial r(dim_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) r.add_term(merge(ma, mb), ca * cb);
        return r;
    }

    template <typename S2>
    Polynomial<S2> cast() const {
        Polynomial<S2> out(dim_);
        for (const auto& [m, c] : terms_) out.add_term(m, static_cast<S2>(c));
        return out;
    }

private:
    static Monomial merge(const Monomial& a, const Monomial& b) {
        Monomial out;
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
                out.push_back(a[i++]);
            else if (i == a.size() || b[j].first < a[i].first)
                out.push_back(b[j++]);
            else {
                out.emplace_back(a[i].first, a[i].second + b[j].second);
                ++i, ++j;
            }
        }
        return out;
    }

    int dim_;
    std::map<Monomial, Scalar> terms_;
};

// Polynomial map R^in -> R^out, one polynomial per output component.
template <typename Scalar>
struct PolyMapT {
    int in_dim = 0;
    std::vector<Polynomial<Scalar>> components;

    int out_dim() const { return static_cast<int>(components.size()); }

    std::vector<Scalar> eval(const std::vector<Scalar>& x) const {
        std::vector<Scalar> out;
        out.reserve(components.size());
        for (const auto& p : components) out.push_back(p.eval(x));
        return out;
    }

    template <typename S2>
    PolyMapT<S2> cast() const {
        PolyMapT<S2> out;
        out.in_dim = in_dim;
        for (const auto& p : components) out.components.push_back(p.template cast<S2>());
        return out;
    }
};

using PolyFunctional = PolyMapT<double>;

// Substitute g's outputs for f's inputs; requires f.in_dim == g.out_dim().
template <typename Scalar>
Polynomial<Scalar> compose_one(const Polynomial<Scalar>& f, const PolyMapT<Scalar>& g) {
    if (f.dim() != g.out_dim()) throw DomainError("composition dimension mismatch");
    const int d = g.in_dim;
    // pow_cache[v][e-1] = g.components[v]^e, filled on demand
    std::vector<std::vector<Polynomial<Scalar>>> pow_cache(g.components.size());
    auto power = [&](int v, int e) -> const Polynomial<Scalar>& {
        auto& powers = pow_cache[static_cast<std::size_t>(v)];
        if (powers.empty()) powers.push_back(g.components[v]);
        while (static_cast<int>(powers.size()) < e) powers.push_back(powers.back() * g.components[v]);
        return powers[static_cast<std::size_t>(e - 1)];
    };
    Polynomial<Scalar> out(d);
    for (const auto& [m, c] : f.terms()) {
        Polynomial<Scalar> term = Polynomial<Scalar>::constant(d, c);
        for (const auto& [v, e] : m) term = term * power(v, e);
        out += term;
    }
    return out;
}

template <typename Scalar>
PolyMapT<Scalar> compose(const PolyMapT<Scalar>& f, const PolyMapT<Scalar>& g) {
    PolyMapT<Scalar> out;
    out.in_dim = g.in_dim;
    for (const auto& comp : f.components) out.components.push_back(compose_one(comp, g));
    return out;
}

}  // namespace popcalc
