#include "popcalc/calculus.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "popcalc/partitions.hpp"

namespace popcalc {

namespace {

using Rational = boost::multiprecision::cpp_rational;

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

template <typename Scalar>
std::vector<Scalar> convert_vec(const Eigen::VectorXd& v) {
    std::vector<Scalar> out;
    out.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out.emplace_back(v[i]);
    return out;
}

template <typename Scalar>
std::vector<Scalar> differential_eval(const PolyMapT<Scalar>& f, const std::vector<Scalar>& x,
                                      const std::vector<std::vector<Scalar>>& dirs) {
    std::vector<Scalar> out;
    out.reserve(f.components.size());
    for (const auto& comp : f.components) {
        Polynomial<Scalar> d = comp;
        for (const auto& eta : dirs) d = d.directional_derivative(eta);
        out.push_back(d.eval(x));
    }
    return out;
}

void check_dims(const PolyFunctional& f, const Eigen::VectorXd& x, const DirectionSet& dirs) {
    if (static_cast<int>(x.size()) != f.in_dim)
        throw DomainError("point dimension does not match functional input dimension");
    for (const auto& d : dirs)
        if (static_cast<int>(d.size()) != f.in_dim)
            throw DomainError("direction dimension does not match functional input dimension");
}

}  // namespace

Eigen::VectorXd eval(const PolyFunctional& f, const Eigen::VectorXd& x) {
    check_dims(f, x, {});
    auto v = f.eval(to_std(x));
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd analytic_differential(const PolyFunctional& f, const Eigen::VectorXd& x,
                                      const DirectionSet& dirs) {
    check_dims(f, x, dirs);
    std::vector<std::vector<double>> ds;
    ds.reserve(dirs.size());
    for (const auto& d : dirs) ds.push_back(to_std(d));
    auto v = differential_eval(f, to_std(x), ds);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd fd_differential(const PolyFunctional& f, const Eigen::VectorXd& x,
                                const DirectionSet& dirs, double step) {
    check_dims(f, x, dirs);
    if (step <= 0) throw DomainError("finite-difference step must be positive");
    if (dirs.empty()) return eval(f, x);
    DirectionSet rest(dirs.begin(), dirs.end() - 1);
    Eigen::VectorXd hi = fd_differential(f, x + step * dirs.back(), rest, step);
    Eigen::VectorXd lo = fd_differential(f, x, rest, step);
    return (hi - lo) / step;
}

Eigen::VectorXd faa_di_bruno(const PolyFunctional& f, const PolyFunctional& g,
                             const Eigen::VectorXd& x, const DirectionSet& dirs) {
    check_dims(g, x, dirs);
    if (f.in_dim != g.out_dim()) throw DomainError("composition dimension mismatch");
    const int n = static_cast<int>(dirs.size());
    if (n > 8)
        throw DomainError("partition-sum chain rule supports orders up to 8, got " +
                          std::to_string(n));
    const Eigen::VectorXd gx = eval(g, x);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(f.out_dim());
    PartitionEnumerator en(n);
    Partition pi;
    while (en.next(pi)) {
        // inner differentials of g, one direction vector per block
        DirectionSet xi;
        xi.reserve(pi.blocks.size());
        for (const auto& block : pi.blocks) {
            DirectionSet block_dirs;
            block_dirs.reserve(block.size());
            for (int i : block) block_dirs.push_back(dirs[static_cast<std::size_t>(i)]);
            xi.push_back(analytic_differential(g, x, block_dirs));
        }
        out += analytic_differential(f, gx, xi);
    }
    return out;
}

Eigen::VectorXd composite_differential_reference(const PolyFunctional& f, const PolyFunctional& g,
                                                 const Eigen::VectorXd& x,
                                                 const DirectionSet& dirs) {
    check_dims(g, x, dirs);
    if (f.in_dim != g.out_dim()) throw DomainError("composition dimension mismatch");
    const auto fr = f.cast<Rational>();
    const auto gr = g.cast<Rational>();
    const auto composite = compose(fr, gr);
    std::vector<std::vector<Rational>> ds;
    ds.reserve(dirs.size());
    for (const auto& d : dirs) ds.push_back(convert_vec<Rational>(d));
    auto v = differential_eval(composite, convert_vec<Rational>(x), ds);
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = static_cast<double>(v[i]);
    return out;
}

TotalDecomposition total_differential_decomposition(const PolyFunctional& f,
                                                    const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& direction) {
    check_dims(f, x, {direction});
    if (f.out_dim() != 1)
        throw DomainError("total differential decomposition expects a scalar functional");
    TotalDecomposition out;
    out.total = analytic_differential(f, x, {direction})[0];
    out.partials.resize(static_cast<std::size_t>(f.in_dim));
    for (int v = 0; v < f.in_dim; ++v) {
        Eigen::VectorXd masked = Eigen::VectorXd::Zero(f.in_dim);
        masked[v] = direction[v];
        out.partials[static_cast<std::size_t>(v)] = analytic_differential(f, x, {masked})[0];
    }
    return out;
}

double multilinear_differential(const PolyFunctional& F, int slot_width, MultilinearMode mode,
                                const std::vector<Eigen::VectorXd>& slot_points,
                                const DirectionSet& dirs) {
    if (F.out_dim() != 1) throw DomainError("multilinear differential expects a scalar map");
    if (slot_width <= 0 || F.in_dim % slot_width != 0)
        throw DomainError("input dimension is not a multiple of the slot width");
    const int n = F.in_dim / slot_width;
    if (static_cast<int>(slot_points.size()) != n)
        throw DomainError("expected one point per slot");
    const int k = static_cast<int>(dirs.size());
    if (k > n) throw DomainError("more directions than slots");
    for (const auto& p : slot_points)
        if (static_cast<int>(p.size()) != slot_width) throw DomainError("slot point width mismatch");
    for (const auto& d : dirs)
        if (static_cast<int>(d.size()) != slot_width) throw DomainError("direction width mismatch");

    // multilinear = every monomial takes exactly one variable, to the first
    // power, from every slot group
    for (const auto& [m, c] : F.components[0].terms()) {
        std::vector<int> per_slot(static_cast<std::size_t>(n), 0);
        for (const auto& [v, e] : m) per_slot[static_cast<std::size_t>(v / slot_width)] += e;
        for (int s = 0; s < n; ++s)
            if (per_slot[static_cast<std::size_t>(s)] != 1)
                throw DomainError("map is not multilinear in the declared slots");
    }

    auto eval_with = [&](const std::vector<const Eigen::VectorXd*>& slots) {
        Eigen::VectorXd x(F.in_dim);
        for (int s = 0; s < n; ++s) x.segment(s * slot_width, slot_width) = *slots[s];
        return eval(F, x)[0];
    };

    std::vector<const Eigen::VectorXd*> slots(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) slots[static_cast<std::size_t>(s)] = &slot_points[s];

    if (mode == MultilinearMode::PartialPrefix) {
        for (int i = 0; i < k; ++i) slots[static_cast<std::size_t>(i)] = &dirs[i];
        return eval_with(slots);
    }

    // total: sum over ordered injections of directions into distinct slots
    double sum = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    // iterate ordered k-tuples of distinct slots
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == k) {
            auto with = slots;
            for (int i = 0; i < k; ++i) with[static_cast<std::size_t>(idx[i])] = &dirs[i];
            sum += eval_with(with);
            return;
        }
        for (int s = 0; s < n; ++s) {
            if (used[static_cast<std::size_t>(s)]) continue;
            used[static_cast<std::size_t>(s)] = true;
            idx[static_cast<std::size_t>(depth)] = s;
            self(self, depth + 1);
            used[static_cast<std::size_t>(s)] = false;
        }
    };
    rec(rec, 0);
    return sum;
}

}  // namespace popcalc
