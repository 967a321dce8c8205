#include "popcalc/sequence_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "popcalc/errors.hpp"

namespace popcalc {

namespace {

double validate_weights(const DiscreteSpace& space, const std::vector<Eigen::ArrayXd>& weights) {
    if (space.size() <= 0) throw DomainError("sequence distribution needs a non-empty space");
    if (weights.empty()) throw DomainError("sequence distribution needs a cardinality-0 entry");
    double total = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const auto expect = tuple_count(space.size(), static_cast<int>(n));
        if (static_cast<std::size_t>(weights[n].size()) != expect)
            throw DomainError("weight array for cardinality " + std::to_string(n) +
                              " has wrong size");
        if ((weights[n] < -1e-12).any())
            throw DomainError("negative weight at cardinality " + std::to_string(n));
        total += weights[n].sum();
    }
    return total;
}

}  // namespace

SequenceDist::SequenceDist(DiscreteSpace space, std::vector<Eigen::ArrayXd> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
    const double total = validate_weights(space_, weights_);
    if (std::abs(total - 1.0) > kMassTolerance)
        throw DomainError("sequence distribution mass " + std::to_string(total) +
                          " is not within tolerance of one");
}

SequenceDist::SequenceDist(DiscreteSpace space, std::vector<Eigen::ArrayXd> weights, AllowSubnormal)
    : space_(std::move(space)), weights_(std::move(weights)) {
    const double total = validate_weights(space_, weights_);
    if (total > 1.0 + kMassTolerance)
        throw DomainError("sub-law mass " + std::to_string(total) + " exceeds one");
}

SequenceDist SequenceDist::empty_process(DiscreteSpace space) {
    std::vector<Eigen::ArrayXd> w(1);
    w[0] = Eigen::ArrayXd::Ones(1);
    return SequenceDist(std::move(space), std::move(w));
}

const Eigen::ArrayXd& SequenceDist::weights(int n) const {
    if (n < 0 || n > n_max()) throw DomainError("cardinality out of range");
    return weights_[static_cast<std::size_t>(n)];
}

double SequenceDist::mass() const {
    double total = 0.0;
    for (const auto& w : weights_) total += w.sum();
    return total;
}

double SequenceDist::probability(const Tuple& t) const {
    const int n = static_cast<int>(t.size());
    if (n > n_max()) return 0.0;
    return weights_[static_cast<std::size_t>(n)][static_cast<Eigen::Index>(
        tuple_index(space_.size(), t))];
}

namespace {

void check_w(const SequenceDist& d, const TestFunction& w) {
    if (w.size() != d.space().size())
        throw DomainError("test function size does not match the space");
}

// contract the trailing slot of a dense X^n array against w
Eigen::ArrayXd fold_last(const Eigen::ArrayXd& arr, const TestFunction& w) {
    const auto s = w.size();
    Eigen::ArrayXd out(arr.size() / s);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = (arr.segment(i * s, s) * w).sum();
    return out;
}

}  // namespace

double expectation_F(const SequenceDist& d, const TestFunction& w) {
    check_w(d, w);
    double total = 0.0;
    for (int n = 0; n <= d.n_max(); ++n) {
        Eigen::ArrayXd cur = d.weights(n);
        for (int k = 0; k < n; ++k) cur = fold_last(cur, w);
        total += cur[0];
    }
    return total;
}

double expectation_F(const SequenceDist& d, const std::vector<TestFunction>& slot_w) {
    if (static_cast<int>(slot_w.size()) < d.n_max())
        throw DomainError("need a test function for every slot up to the cardinality cap");
    double total = 0.0;
    for (int n = 0; n <= d.n_max(); ++n) {
        Eigen::ArrayXd cur = d.weights(n);
        for (int k = n - 1; k >= 0; --k) {  // trailing slot first
            check_w(d, slot_w[static_cast<std::size_t>(k)]);
            cur = fold_last(cur, slot_w[static_cast<std::size_t>(k)]);
        }
        total += cur[0];
    }
    return total;
}

double janossy(const SequenceDist& d, const Tuple& t) {
    std::vector<int> pos(t.size());
    std::iota(pos.begin(), pos.end(), 0);
    double sum = 0.0;
    Tuple perm(t.size());
    do {
        for (std::size_t i = 0; i < t.size(); ++i) perm[i] = t[static_cast<std::size_t>(pos[i])];
        sum += d.probability(perm);
    } while (std::next_permutation(pos.begin(), pos.end()));
    return sum;
}

namespace {

// sum of probabilities over X^n with positions `pins` fixed
double pinned_marginal(const SequenceDist& d, int n, const std::vector<int>& pin_pos,
                       const Tuple& pin_val) {
    Tuple t(static_cast<std::size_t>(n), 0);
    std::vector<bool> pinned(static_cast<std::size_t>(n), false);
    for (std::size_t i = 0; i < pin_pos.size(); ++i) {
        t[static_cast<std::size_t>(pin_pos[i])] = pin_val[i];
        pinned[static_cast<std::size_t>(pin_pos[i])] = true;
    }
    double sum = 0.0;
    // odometer over the free positions
    while (true) {
        sum += d.probability(t);
        int i = n - 1;
        for (; i >= 0; --i) {
            if (pinned[static_cast<std::size_t>(i)]) continue;
            auto& v = t[static_cast<std::size_t>(i)];
            if (++v < d.space().size()) break;
            v = 0;
        }
        if (i < 0) break;
    }
    return sum;
}

}  // namespace

double factorial_moment(const SequenceDist& d, const Tuple& query) {
    const int k = static_cast<int>(query.size());
    double total = 0.0;
    for (int n = k; n <= d.n_max(); ++n) {
        // ordered injections of query slots into tuple positions
        std::vector<int> pos;
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        auto rec = [&](auto&& self, int depth) -> void {
            if (depth == k) {
                total += pinned_marginal(d, n, pos, query);
                return;
            }
            for (int p = 0; p < n; ++p) {
                if (used[static_cast<std::size_t>(p)]) continue;
                used[static_cast<std::size_t>(p)] = true;
                pos.push_back(p);
                self(self, depth + 1);
                pos.pop_back();
                used[static_cast<std::size_t>(p)] = false;
            }
        };
        rec(rec, 0);
    }
    return total;
}

double counting_measure(const Tuple& realization, const Tuple& query) {
    const int n = static_cast<int>(realization.size());
    const int k = static_cast<int>(query.size());
    if (k > n) return 0.0;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    double count = 0.0;
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == k) {
            count += 1.0;
            return;
        }
        for (int p = 0; p < n; ++p) {
            if (used[static_cast<std::size_t>(p)]) continue;
            if (realization[static_cast<std::size_t>(p)] != query[static_cast<std::size_t>(depth)])
                continue;
            used[static_cast<std::size_t>(p)] = true;
            self(self, depth + 1);
            used[static_cast<std::size_t>(p)] = false;
        }
    };
    rec(rec, 0);
    return count;
}

Eigen::ArrayXd cardinality_pmf(const SequenceDist& d) {
    Eigen::ArrayXd p(d.n_max() + 1);
    for (int n = 0; n <= d.n_max(); ++n) p[n] = d.weights(n).sum();
    return p;
}

Eigen::ArrayXd intensity(const SequenceDist& d) {
    Eigen::ArrayXd m(d.space().size());
    for (int x = 0; x < d.space().size(); ++x) m[x] = factorial_moment(d, {x});
    return m;
}

SequenceDist superpose(const SequenceDist& a, const SequenceDist& b) {
    if (!a.space().same_points(b.space()))
        throw DomainError("superposition needs processes on the same space");
    const int s = a.space().size();
    const int n_out = a.n_max() + b.n_max();
    // make the budget failure explicit, with the cardinality it would need
    try {
        tuple_count(s, n_out);
    } catch (const DomainError&) {
        throw DomainError("superposition would need dense arrays up to cardinality " +
                          std::to_string(n_out) + ", beyond the cell budget");
    }
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n_out) + 1);
    for (int n = 0; n <= n_out; ++n)
        w[static_cast<std::size_t>(n)] =
            Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, n)));
    for (int na = 0; na <= a.n_max(); ++na) {
        for (int nb = 0; nb <= b.n_max(); ++nb) {
            const auto& wa = a.weights(na);
            const auto& wb = b.weights(nb);
            auto& dst = w[static_cast<std::size_t>(na + nb)];
            const Eigen::Index span = wb.size();
            for (Eigen::Index ia = 0; ia < wa.size(); ++ia) {
                if (wa[ia] == 0.0) continue;
                dst.segment(ia * span, span) += wa[ia] * wb;
            }
        }
    }
    return SequenceDist(a.space(), std::move(w));
}

SequenceDist make_independent(const DiscreteSpace& space, const Eigen::ArrayXd& card_pmf,
                              const std::vector<std::vector<Eigen::ArrayXd>>& marginals) {
    const int s = space.size();
    const int n_top = static_cast<int>(card_pmf.size()) - 1;
    if (n_top < 0) throw DomainError("cardinality pmf is empty");
    if ((card_pmf < -1e-12).any() || std::abs(card_pmf.sum() - 1.0) > SequenceDist::kMassTolerance)
        throw DomainError("cardinality pmf must be a probability vector");
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n_top) + 1);
    for (int n = 0; n <= n_top; ++n) {
        auto& arr = w[static_cast<std::size_t>(n)];
        arr = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, n)));
        if (card_pmf[n] == 0.0) continue;
        if (n == 0) {
            arr[0] = card_pmf[0];
            continue;
        }
        if (static_cast<int>(marginals.size()) <= n ||
            static_cast<int>(marginals[static_cast<std::size_t>(n)].size()) != n)
            throw DomainError("need " + std::to_string(n) + " slot marginals for cardinality " +
                              std::to_string(n));
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            double p = card_pmf[n];
            for (int i = 0; i < n; ++i) {
                const auto& m = marginals[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
                if (m.size() != s) throw DomainError("slot marginal has wrong size");
                p *= m[t[static_cast<std::size_t>(i)]];
            }
            arr[static_cast<Eigen::Index>(idx++)] = p;
        } while (n > 0 && next_tuple(s, t));
    }
    return SequenceDist(space, std::move(w));
}

SequenceDist make_multi_bernoulli(const DiscreteSpace& space,
                                  const std::vector<BernoulliComponent>& components) {
    const int s = space.size();
    const int c = static_cast<int>(components.size());
    for (const auto& comp : components) {
        if (comp.q < 0.0 || comp.q > 1.0) throw DomainError("presence probability outside [0,1]");
        if (comp.location.size() != s ||
            std::abs(comp.location.sum() - 1.0) > SequenceDist::kMassTolerance)
            throw DomainError("component location must be a distribution over the space");
    }
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(c) + 1);
    for (int n = 0; n <= c; ++n)
        w[static_cast<std::size_t>(n)] =
            Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, n)));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << c); ++mask) {
        double pq = 1.0;
        std::vector<int> present;
        for (int i = 0; i < c; ++i) {
            if (mask & (std::uint64_t{1} << i)) {
                pq *= components[static_cast<std::size_t>(i)].q;
                present.push_back(i);
            } else {
                pq *= 1.0 - components[static_cast<std::size_t>(i)].q;
            }
        }
        if (pq == 0.0) continue;
        const int n = static_cast<int>(present.size());
        auto& arr = w[static_cast<std::size_t>(n)];
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            double p = pq;
            for (int i = 0; i < n; ++i)
                p *= components[static_cast<std::size_t>(present[static_cast<std::size_t>(i)])]
                         .location[t[static_cast<std::size_t>(i)]];
            arr[static_cast<Eigen::Index>(idx++)] += p;
        } while (n > 0 && next_tuple(s, t));
    }
    return SequenceDist(space, std::move(w));
}

SequenceDist make_multi_bernoulli_literal(
    const DiscreteSpace& space, const std::vector<std::vector<double>>& q,
    const std::vector<std::vector<Eigen::ArrayXd>>& marginals) {
    const int s = space.size();
    const int n_top = static_cast<int>(q.size()) - 1;
    if (n_top < 0) throw DomainError("need at least the cardinality-0 row");
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n_top) + 1);
    double total = 0.0;
    for (int n = 0; n <= n_top; ++n) {
        const auto& qrow = q[static_cast<std::size_t>(n)];
        if (static_cast<int>(qrow.size()) != n)
            throw DomainError("q row for cardinality " + std::to_string(n) + " must have " +
                              std::to_string(n) + " entries");
        auto& arr = w[static_cast<std::size_t>(n)];
        arr = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, n)));
        double pn = 1.0;
        for (double v : qrow) pn *= v;
        if (pn == 0.0) continue;
        if (n == 0) {
            arr[0] = pn;
            total += pn;
            continue;
        }
        if (static_cast<int>(marginals.size()) <= n ||
            static_cast<int>(marginals[static_cast<std::size_t>(n)].size()) != n)
            throw DomainError("need slot marginals for cardinality " + std::to_string(n));
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            double p = pn;
            for (int i = 0; i < n; ++i)
                p *= marginals[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)]
                              [t[static_cast<std::size_t>(i)]];
            arr[static_cast<Eigen::Index>(idx++)] = p;
        } while (n > 0 && next_tuple(s, t));
        total += arr.sum();
    }
    if (total <= 0.0) throw DomainError("literal product weights sum to zero");
    for (auto& arr : w) arr /= total;  // the literal form is unnormalized by design
    return SequenceDist(space, std::move(w));
}

namespace {

SequenceDist finish_truncated(const DiscreteSpace& space, std::vector<Eigen::ArrayXd> w,
                              bool renormalize) {
    double total = 0.0;
    for (const auto& arr : w) total += arr.sum();
    const double tail = 1.0 - total;
    if (renormalize) {
        for (auto& arr : w) arr /= total;
    } else if (tail > kTailTolerance) {
        throw DomainError("truncation tail mass " + std::to_string(tail) +
                          " exceeds tolerance; raise n_max or pass renormalize");
    }
    return SequenceDist(space, std::move(w));
}

}  // namespace

SequenceDist make_poisson(const DiscreteSpace& space, const Eigen::ArrayXd& lambda, int n_max,
                          bool renormalize) {
    const int s = space.size();
    if (lambda.size() != s || (lambda < 0).any())
        throw DomainError("intensity must be non-negative over the space");
    const double big_lambda = lambda.sum();
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n_max) + 1);
    double nfact = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) nfact *= n;
        auto& arr = w[static_cast<std::size_t>(n)];
        arr.resize(static_cast<Eigen::Index>(tuple_count(s, n)));
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            double p = std::exp(-big_lambda) / nfact;
            for (int i = 0; i < n; ++i) p *= lambda[t[static_cast<std::size_t>(i)]];
            arr[static_cast<Eigen::Index>(idx++)] = p;
        } while (n > 0 && next_tuple(s, t));
    }
    return finish_truncated(space, std::move(w), renormalize);
}

double KhinchinFamily::total_intensity() const {
    double k0 = 0.0;
    for (const auto& arr : clusters) k0 += arr.sum();
    return k0;
}

SequenceDist make_khinchin(const KhinchinFamily& family, int n_max, bool renormalize) {
    const int s = family.space.size();
    for (std::size_t i = 0; i < family.clusters.size(); ++i) {
        if (static_cast<std::size_t>(family.clusters[i].size()) !=
            tuple_count(s, static_cast<int>(i) + 1))
            throw DomainError("cluster intensity for size " + std::to_string(i + 1) +
                              " has wrong array size");
        if ((family.clusters[i] < 0).any()) throw DomainError("cluster intensity negative");
    }
    const double k0 = family.total_intensity();
    // concatenation convolution: T_r = law of r clusters laid end to end
    // (unnormalized by the Poisson(r) factor, truncated above n_max)
    std::vector<Eigen::ArrayXd> acc(static_cast<std::size_t>(n_max) + 1);
    std::vector<Eigen::ArrayXd> t_prev(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        const auto cells = static_cast<Eigen::Index>(tuple_count(s, n));
        acc[static_cast<std::size_t>(n)] = Eigen::ArrayXd::Zero(cells);
        t_prev[static_cast<std::size_t>(n)] = Eigen::ArrayXd::Zero(cells);
    }
    t_prev[0][0] = 1.0;  // zero clusters
    acc[0][0] = 1.0;
    double rfact = 1.0;
    for (int r = 1; r <= n_max; ++r) {  // every cluster carries at least one point
        rfact *= r;
        std::vector<Eigen::ArrayXd> t_cur(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n)
            t_cur[static_cast<std::size_t>(n)] =
                Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, n)));
        for (int base = 0; base + 1 <= n_max; ++base) {
            const auto& prev = t_prev[static_cast<std::size_t>(base)];
            for (int c = 1; c <= family.max_cluster_size() && base + c <= n_max; ++c) {
                const auto& cluster = family.clusters[static_cast<std::size_t>(c - 1)];
                auto& dst = t_cur[static_cast<std::size_t>(base + c)];
                const Eigen::Index span = cluster.size();
                for (Eigen::Index ip = 0; ip < prev.size(); ++ip) {
                    if (prev[ip] == 0.0) continue;
                    dst.segment(ip * span, span) += prev[ip] * cluster;
                }
            }
        }
        for (int n = 0; n <= n_max; ++n)
            acc[static_cast<std::size_t>(n)] += t_cur[static_cast<std::size_t>(n)] / rfact;
        t_prev = std::move(t_cur);
    }
    for (auto& arr : acc) arr *= std::exp(-k0);
    return finish_truncated(family.space, std::move(acc), renormalize);
}

double khinchin_pgfl(const KhinchinFamily& family, const TestFunction& w) {
    if (w.size() != family.space.size()) throw DomainError("test function size mismatch");
    double expo = -family.total_intensity();
    const int s = family.space.size();
    for (int c = 1; c <= family.max_cluster_size(); ++c) {
        const auto& arr = family.clusters[static_cast<std::size_t>(c - 1)];
        Tuple t(static_cast<std::size_t>(c), 0);
        std::size_t idx = 0;
        do {
            double term = arr[static_cast<Eigen::Index>(idx++)];
            for (int i = 0; i < c; ++i) term *= w[t[static_cast<std::size_t>(i)]];
            expo += term;
        } while (next_tuple(s, t));
    }
    return std::exp(expo);
}

}  // namespace popcalc
