#include "popcalc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>

#include "popcalc/errors.hpp"
#include "popcalc/partitions.hpp"

namespace popcalc {

double hierarchical_expectation(const JointDist& joint, const TestFunction& w_parent,
                                const TestFunction& w_daughter) {
    return joint_expectation(joint, w_parent, w_daughter);
}

double InteractionSpec::p_block(int size, int z) const {
    if (block_pmf_by_z.rows() > 0) {
        if (z < 0 || z >= block_pmf_by_z.rows() || size >= block_pmf_by_z.cols()) return 0.0;
        return block_pmf_by_z(z, size);
    }
    if (size < 0 || size >= block_pmf.size()) return 0.0;
    return block_pmf[size];
}

namespace {

void check_spec(const InteractionSpec& spec) {
    if (!spec.conditional) throw DomainError("interaction needs a conditional daughter kernel");
    if (spec.block_pmf_by_z.rows() == 0 && (spec.block_pmf < 0).any())
        throw DomainError("block-size weights must be non-negative");
}

Tuple subtuple(const Tuple& t, const std::vector<int>& idx) {
    Tuple out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(t[static_cast<std::size_t>(i)]);
    return out;
}

// per-(parent block, psi point) evaluations, cached per call
class ConditionalCache {
public:
    explicit ConditionalCache(const InteractionSpec& spec) : spec_(spec) {}

    const SequenceDist& at(const Tuple& block, int z) {
        const auto key = std::make_pair(block, z);
        auto it = dists_.find(key);
        if (it == dists_.end()) {
            SequenceDist d = spec_.conditional(block, z);
            if (!d.space().same_points(spec_.daughter_space))
                throw DomainError("conditional lives on the wrong daughter space");
            it = dists_.emplace(key, std::move(d)).first;
        }
        return it->second;
    }

    // expectation of prod w over the conditional (w = ones gives its mass)
    double g(const Tuple& block, int z, const TestFunction& w) {
        auto key = std::make_tuple(block, z, static_cast<const void*>(w.data()));
        auto it = gs_.find(key);
        if (it == gs_.end()) it = gs_.emplace(key, expectation_F(at(block, z), w)).first;
        return it->second;
    }

private:
    const InteractionSpec& spec_;
    std::map<std::pair<Tuple, int>, SequenceDist> dists_;
    std::map<std::tuple<Tuple, int, const void*>, double> gs_;
};

// the shared partition sum: expectation of prod w over the daughters times
// the grouping weights, unnormalized
double interaction_sum(const InteractionSpec& spec, const Tuple& parents, const TestFunction& w,
                       ConditionalCache& cache) {
    const int k = static_cast<int>(parents.size());
    if (k > kInteractionCap)
        throw DomainError("parent cardinality " + std::to_string(k) + " beyond the partition cap");
    const SequenceDist& psi = spec.psi;
    double total = 0.0;
    PartitionEnumerator en(k);
    Partition part;
    while (en.next(part)) {
        const int r = part.block_count();
        std::vector<Tuple> blocks;
        blocks.reserve(static_cast<std::size_t>(r));
        for (const auto& b : part.blocks) blocks.push_back(subtuple(parents, b));
        for (int n = r; n <= psi.n_max(); ++n) {
            Tuple z(static_cast<std::size_t>(n), 0);
            do {
                const double pz = psi.probability(z);
                if (pz == 0.0) continue;
                double term = pz;
                for (int i = 0; i < r && term != 0.0; ++i) {
                    const int zi = z[static_cast<std::size_t>(i)];
                    // skip the conditional when the grouping weight already vanishes;
                    // kernels may be undefined for impossible block sizes
                    const double pb = spec.p_block(
                        static_cast<int>(blocks[static_cast<std::size_t>(i)].size()), zi);
                    term = pb == 0.0
                               ? 0.0
                               : term * pb * cache.g(blocks[static_cast<std::size_t>(i)], zi, w);
                }
                for (int i = r; i < n && term != 0.0; ++i) {
                    const int zi = z[static_cast<std::size_t>(i)];
                    const double p0 = spec.p_block(0, zi);
                    term = p0 == 0.0 ? 0.0 : term * p0 * cache.g({}, zi, w);
                }
                total += term;
            } while (!z.empty() && next_tuple(psi.space().size(), z));
        }
    }
    return total;
}

}  // namespace

double interacting_conditional(const InteractionSpec& spec, const Tuple& parents,
                               const TestFunction& w) {
    check_spec(spec);
    if (w.size() != spec.daughter_space.size())
        throw DomainError("test function size does not match the daughter space");
    ConditionalCache cache(spec);
    const TestFunction ones = TestFunction::Ones(spec.daughter_space.size());
    const double den = interaction_sum(spec, parents, ones, cache);
    if (!(den > 0.0))
        throw DegenerateError("interaction normalizer vanishes for the given parents");
    return interaction_sum(spec, parents, w, cache) / den;
}

namespace {

struct KernelNumerators {
    double janossy_weight = 0.0;
    double moment_weight = 0.0;
};

// mixed partition sum over daughters and parents together: parent-holding
// blocks feed the leading psi slots in canonical order, daughter-only blocks
// are injected into the remaining slots, untouched slots stay silent
KernelNumerators kernel_numerators(const InteractionSpec& spec, const Tuple& parents,
                                   const Tuple& daughters, ConditionalCache& cache) {
    const int k = static_cast<int>(parents.size());
    const int l = static_cast<int>(daughters.size());
    if (k + l > kInteractionCap)
        throw DomainError("parent and daughter cardinalities " + std::to_string(k) + "+" +
                          std::to_string(l) + " beyond the partition cap");
    const SequenceDist& psi = spec.psi;
    KernelNumerators out;
    PartitionEnumerator en(k + l);
    Partition part;
    while (en.next(part)) {
        // elements 0..k-1 are parents, k.. are daughter positions; blocks are
        // canonical, so parent-holding blocks come first ordered by their
        // smallest parent
        std::vector<Tuple> parent_parts, daughter_parts;  // parent-holding blocks
        std::vector<Tuple> lone_daughters;                // daughter-only blocks
        for (const auto& b : part.blocks) {
            Tuple px, dx;
            for (int e : b) {
                if (e < k)
                    px.push_back(parents[static_cast<std::size_t>(e)]);
                else
                    dx.push_back(daughters[static_cast<std::size_t>(e - k)]);
            }
            if (px.empty()) {
                lone_daughters.push_back(std::move(dx));
            } else {
                parent_parts.push_back(std::move(px));
                daughter_parts.push_back(std::move(dx));
            }
        }
        const int r = static_cast<int>(parent_parts.size());
        const int s = static_cast<int>(lone_daughters.size());
        for (int n = r + s; n <= psi.n_max(); ++n) {
            Tuple z(static_cast<std::size_t>(n), 0);
            do {
                const double pz = psi.probability(z);
                if (pz == 0.0) continue;
                double base_j = pz;
                double base_m = pz;
                for (int i = 0; i < r; ++i) {
                    const int zi = z[static_cast<std::size_t>(i)];
                    const double pb = spec.p_block(
                        static_cast<int>(parent_parts[static_cast<std::size_t>(i)].size()), zi);
                    if (pb == 0.0) {
                        base_j = base_m = 0.0;
                        break;
                    }
                    const SequenceDist& cond =
                        cache.at(parent_parts[static_cast<std::size_t>(i)], zi);
                    base_j *= pb * janossy(cond, daughter_parts[static_cast<std::size_t>(i)]);
                    base_m *= pb * factorial_moment(cond, daughter_parts[static_cast<std::size_t>(i)]);
                }
                if (base_j == 0.0 && base_m == 0.0) continue;
                // free slots r..n-1: inject daughter-only blocks, silence the rest
                std::vector<bool> used(static_cast<std::size_t>(n), false);
                double sum_j = 0.0, sum_m = 0.0;
                auto rec = [&](auto&& self, int d, double acc_j, double acc_m) -> void {
                    if (d == s) {
                        for (int i = r; i < n; ++i) {
                            if (used[static_cast<std::size_t>(i)]) continue;
                            const int zi = z[static_cast<std::size_t>(i)];
                            const double p0 = spec.p_block(0, zi);
                            if (p0 == 0.0) {
                                acc_j = acc_m = 0.0;
                                break;
                            }
                            acc_j *= p0 * cache.at({}, zi).probability({});
                            acc_m *= p0;
                        }
                        sum_j += acc_j;
                        sum_m += acc_m;
                        return;
                    }
                    for (int i = r; i < n; ++i) {
                        if (used[static_cast<std::size_t>(i)]) continue;
                        const int zi = z[static_cast<std::size_t>(i)];
                        const double p0 = spec.p_block(0, zi);
                        if (p0 == 0.0) continue;
                        const SequenceDist& cond = cache.at({}, zi);
                        used[static_cast<std::size_t>(i)] = true;
                        self(self, d + 1,
                             acc_j * p0 * janossy(cond, lone_daughters[static_cast<std::size_t>(d)]),
                             acc_m * p0 *
                                 factorial_moment(cond, lone_daughters[static_cast<std::size_t>(d)]));
                        used[static_cast<std::size_t>(i)] = false;
                    }
                };
                rec(rec, 0, 1.0, 1.0);
                out.janossy_weight += base_j * sum_j;
                out.moment_weight += base_m * sum_m;
            } while (!z.empty() && next_tuple(psi.space().size(), z));
        }
    }
    return out;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

std::pair<double, double> interacting_kernel(const InteractionSpec& spec, const Tuple& parents,
                                             const Tuple& daughters) {
    check_spec(spec);
    ConditionalCache cache(spec);
    const TestFunction ones = TestFunction::Ones(spec.daughter_space.size());
    const double den = interaction_sum(spec, parents, ones, cache);
    if (!(den > 0.0))
        throw DegenerateError("interaction normalizer vanishes for the given parents");
    const auto nums = kernel_numerators(spec, parents, daughters, cache);
    const double l_fact = factorial(static_cast<int>(daughters.size()));
    return {nums.janossy_weight / (l_fact * den), nums.moment_weight / den};
}

SequenceDist interacting_kernel_dist(const InteractionSpec& spec, const Tuple& parents,
                                     int daughter_cap) {
    check_spec(spec);
    ConditionalCache cache(spec);
    const TestFunction ones = TestFunction::Ones(spec.daughter_space.size());
    const double den = interaction_sum(spec, parents, ones, cache);
    if (!(den > 0.0))
        throw DegenerateError("interaction normalizer vanishes for the given parents");
    const int s = spec.daughter_space.size();
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(daughter_cap) + 1);
    for (int l = 0; l <= daughter_cap; ++l) {
        auto& arr = w[static_cast<std::size_t>(l)];
        arr.resize(static_cast<Eigen::Index>(tuple_count(s, l)));
        const double l_fact = factorial(l);
        Tuple y(static_cast<std::size_t>(l), 0);
        std::size_t idx = 0;
        do {
            arr[static_cast<Eigen::Index>(idx++)] =
                kernel_numerators(spec, parents, y, cache).janossy_weight / (l_fact * den);
        } while (l > 0 && next_tuple(s, y));
    }
    return SequenceDist(spec.daughter_space, std::move(w));
}

SequenceDist chapman_kolmogorov(const SequenceDist& prior, const TransitionKernel& kernel) {
    if (!prior.space().same_points(kernel.input_space()))
        throw DomainError("prior space does not match the kernel input space");
    if (kernel.m_max() < prior.n_max())
        throw DomainError("kernel does not cover parent cardinality " +
                          std::to_string(prior.n_max()));
    const DiscreteSpace& out_space = kernel.output_space();
    std::vector<Eigen::ArrayXd> acc(1, Eigen::ArrayXd::Zero(1));
    for (int n = 0; n <= prior.n_max(); ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            const double p = prior.probability(t);
            if (p > 0.0) {
                const SequenceDist cond = kernel.at(t);
                if (cond.n_max() >= static_cast<int>(acc.size())) {
                    const auto old = static_cast<int>(acc.size());
                    acc.resize(static_cast<std::size_t>(cond.n_max()) + 1);
                    for (int j = old; j <= cond.n_max(); ++j)
                        acc[static_cast<std::size_t>(j)] = Eigen::ArrayXd::Zero(
                            static_cast<Eigen::Index>(tuple_count(out_space.size(), j)));
                }
                for (int j = 0; j <= cond.n_max(); ++j)
                    acc[static_cast<std::size_t>(j)] += p * cond.weights(j);
            }
        } while (n > 0 && next_tuple(prior.space().size(), t));
    }
    return SequenceDist(out_space, std::move(acc));
}

TransitionKernel branching_kernel(const TransitionKernel& per_point, const SequenceDist& birth,
                                  int m_max) {
    if (per_point.m_max() < 1) throw DomainError("per-point kernel must accept single parents");
    if (!birth.space().same_points(per_point.output_space()))
        throw DomainError("birth process lives on the wrong space");
    return TransitionKernel(
        per_point.input_space(), per_point.output_space(), m_max,
        [per_point, birth](const Tuple& parents) {
            SequenceDist out = birth;
            for (int y : parents) out = superpose(out, per_point.at({y}));
            return out;
        });
}

std::vector<Eigen::ArrayXd> galton_watson(const Eigen::ArrayXd& offspring_pmf,
                                          const Eigen::ArrayXd& initial_pmf, int steps,
                                          int n_cap) {
    if (steps < 0 || n_cap < 0) throw DomainError("steps and cap must be non-negative");
    for (const auto* pmf : {&offspring_pmf, &initial_pmf}) {
        if (pmf->size() == 0 || (*pmf < -1e-12).any() || std::abs(pmf->sum() - 1.0) > 1e-9)
            throw DomainError("offspring and initial arrays must be probability vectors");
    }
    if (initial_pmf.size() > n_cap + 1 && initial_pmf.tail(initial_pmf.size() - n_cap - 1).sum() >
                                              kGaltonWatsonTail)
        throw DomainError("initial pmf carries mass beyond the cap");
    std::vector<Eigen::ArrayXd> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    Eigen::ArrayXd cur = Eigen::ArrayXd::Zero(n_cap + 1);
    cur.head(std::min<Eigen::Index>(initial_pmf.size(), n_cap + 1)) =
        initial_pmf.head(std::min<Eigen::Index>(initial_pmf.size(), n_cap + 1));
    out.push_back(cur);
    for (int t = 0; t < steps; ++t) {
        Eigen::ArrayXd next = Eigen::ArrayXd::Zero(n_cap + 1);
        // power[j] = probability that n parents have j children in total,
        // truncated at the cap; built up one parent at a time
        Eigen::ArrayXd power = Eigen::ArrayXd::Zero(n_cap + 1);
        power[0] = 1.0;
        for (int n = 0; n <= n_cap; ++n) {
            next += cur[n] * power;
            Eigen::ArrayXd bumped = Eigen::ArrayXd::Zero(n_cap + 1);
            for (int a = 0; a <= n_cap; ++a) {
                if (power[a] == 0.0) continue;
                for (int b = 0; b < offspring_pmf.size() && a + b <= n_cap; ++b)
                    bumped[a + b] += power[a] * offspring_pmf[b];
            }
            power = std::move(bumped);
        }
        const double tail = 1.0 - next.sum();
        if (tail > kGaltonWatsonTail)
            throw DomainError("generation " + std::to_string(t + 1) + " loses tail mass " +
                              std::to_string(tail) + " beyond the cap");
        cur = std::move(next);
        out.push_back(cur);
    }
    return out;
}

double ConjugateFamilyState::total_weight() const {
    double w = 0.0;
    for (const auto& h : hypotheses) w += h.weight;
    return w;
}

int ConjugateFamilyState::max_slots() const {
    int m = 0;
    for (const auto& h : hypotheses) m = std::max(m, static_cast<int>(h.slots.size()));
    return m;
}

SequenceDist ConjugateFamilyState::assemble(int n_max) const {
    if (n_max < 0) n_max = max_slots();
    if (n_max < max_slots()) throw DomainError("assembly cap below the widest hypothesis");
    const int s = space.size();
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n)
        w[static_cast<std::size_t>(n)] =
            Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, n)));
    for (const auto& h : hypotheses) {
        if (h.weight < 0.0) throw DomainError("negative hypothesis weight");
        if (h.weight == 0.0) continue;
        const int n = static_cast<int>(h.slots.size());
        for (const auto& m : h.slots)
            if (m.size() != s || std::abs(m.sum() - 1.0) > 1e-9)
                throw DomainError("slot marginal must be a distribution over the space");
        auto& arr = w[static_cast<std::size_t>(n)];
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            double p = h.weight;
            for (int i = 0; i < n; ++i)
                p *= h.slots[static_cast<std::size_t>(i)][t[static_cast<std::size_t>(i)]];
            arr[static_cast<Eigen::Index>(idx++)] += p;
        } while (n > 0 && next_tuple(s, t));
    }
    return SequenceDist(space, std::move(w));
}

ConjugateFamilyState ConjugateFamilyState::independent_family(
    const DiscreteSpace& space, const Eigen::ArrayXd& card_pmf,
    const std::vector<std::vector<Eigen::ArrayXd>>& marginals) {
    ConjugateFamilyState st{space, {}};
    for (int n = 0; n < card_pmf.size(); ++n) {
        if (card_pmf[n] == 0.0) continue;
        ConjugateHypothesis h;
        h.weight = card_pmf[n];
        if (n > 0) {
            if (static_cast<int>(marginals.size()) <= n ||
                static_cast<int>(marginals[static_cast<std::size_t>(n)].size()) != n)
                throw DomainError("need " + std::to_string(n) + " marginals for cardinality " +
                                  std::to_string(n));
            h.slots = marginals[static_cast<std::size_t>(n)];
        }
        st.hypotheses.push_back(std::move(h));
    }
    return st;
}

ConjugateFamilyState predict_independent(const ConjugateFamilyState& state,
                                         const std::vector<SingleObjectKernel>& slot_kernels,
                                         const ConjugateFamilyState& birth, int max_hypotheses,
                                         double prune_below) {
    if (!state.space.same_points(birth.space))
        throw DomainError("birth family lives on the wrong space");
    if (std::abs(state.total_weight() - 1.0) > 1e-9 || std::abs(birth.total_weight() - 1.0) > 1e-9)
        throw DomainError("hypothesis weights must sum to one");
    if (static_cast<int>(slot_kernels.size()) < state.max_slots())
        throw DomainError("need a kernel for every slot");
    const int s = state.space.size();
    // count before materializing
    double count = 0.0;
    for (const auto& b : birth.hypotheses)
        for (const auto& h : state.hypotheses) {
            (void)b;
            count += std::pow(2.0, static_cast<double>(h.slots.size()));
        }
    if (count > static_cast<double>(max_hypotheses))
        throw DomainError("hypothesis count " + std::to_string(static_cast<long long>(count)) +
                          " exceeds the cap " + std::to_string(max_hypotheses));
    ConjugateFamilyState out{state.space, {}};
    for (const auto& b : birth.hypotheses) {
        for (const auto& h : state.hypotheses) {
            const int k = static_cast<int>(h.slots.size());
            // per-slot survival mass and moved marginal
            std::vector<double> q(static_cast<std::size_t>(k));
            std::vector<Eigen::ArrayXd> moved(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                const auto& kern = slot_kernels[static_cast<std::size_t>(j)];
                if (kern.survival.size() != s || kern.move.rows() != s || kern.move.cols() != s)
                    throw DomainError("slot kernel shape mismatch");
                const Eigen::ArrayXd thinned =
                    h.slots[static_cast<std::size_t>(j)] * kern.survival;
                q[static_cast<std::size_t>(j)] = thinned.sum();
                if (q[static_cast<std::size_t>(j)] > 0.0)
                    moved[static_cast<std::size_t>(j)] =
                        (kern.move.transpose() * thinned.matrix()).array() /
                        q[static_cast<std::size_t>(j)];
            }
            for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << k); ++mask) {
                double weight = b.weight * h.weight;
                for (int j = 0; j < k; ++j)
                    weight *= (mask & (std::uint32_t{1} << j)) ? q[static_cast<std::size_t>(j)]
                                                               : 1.0 - q[static_cast<std::size_t>(j)];
                if (weight == 0.0) continue;
                ConjugateHypothesis nh;
                nh.weight = weight;
                nh.slots = b.slots;
                for (int j = 0; j < k; ++j)
                    if (mask & (std::uint32_t{1} << j))
                        nh.slots.push_back(moved[static_cast<std::size_t>(j)]);
                out.hypotheses.push_back(std::move(nh));
            }
        }
    }
    if (prune_below > 0.0) {
        std::vector<ConjugateHypothesis> kept;
        for (auto& h : out.hypotheses)
            if (h.weight >= prune_below) kept.push_back(std::move(h));
        if (kept.empty()) throw DegenerateError("pruning removed every hypothesis");
        out.hypotheses = std::move(kept);
        double total = out.total_weight();
        for (auto& h : out.hypotheses) h.weight /= total;
    }
    return out;
}

namespace {

void check_renorm(const RenormSpec& spec) {
    if (!spec.block_kernel) throw DomainError("coarse-graining needs a block kernel");
    if ((spec.group_count_pmf < -1e-12).any() || (spec.block_size_pmf < -1e-12).any())
        throw DomainError("grouping weights must be non-negative");
}

}  // namespace

SequenceDist renormalize(const RenormSpec& spec, const Tuple& parents) {
    check_renorm(spec);
    const int k = static_cast<int>(parents.size());
    if (k > kInteractionCap)
        throw DomainError("parent cardinality " + std::to_string(k) + " beyond the partition cap");
    const int s = spec.coarse_space.size();
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(std::max(k, 1)) + 1);
    for (int r = 0; r < static_cast<int>(w.size()); ++r)
        w[static_cast<std::size_t>(r)] =
            Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(s, r)));
    double den = 0.0;
    PartitionEnumerator en(k);
    Partition part;
    while (en.next(part)) {
        const int r = part.block_count();
        const double p_psi =
            r < spec.group_count_pmf.size() ? spec.group_count_pmf[r] : 0.0;
        if (p_psi == 0.0) continue;
        double base = p_psi;
        std::vector<Eigen::ArrayXd> laws;
        laws.reserve(static_cast<std::size_t>(r));
        for (const auto& b : part.blocks) {
            const int size = static_cast<int>(b.size());
            const double pt = size < spec.block_size_pmf.size() ? spec.block_size_pmf[size] : 0.0;
            base *= pt;
            if (base == 0.0) break;
            Eigen::ArrayXd law = spec.block_kernel(subtuple(parents, b));
            if (law.size() != s || (law < -1e-12).any() || law.sum() > 1.0 + 1e-9)
                throw DomainError("block kernel must be a sub-law over the coarse space");
            laws.push_back(std::move(law));
        }
        if (base == 0.0) continue;
        double block_mass = 1.0;
        for (const auto& law : laws) block_mass *= law.sum();
        den += base * block_mass;
        if (block_mass == 0.0) continue;
        // dense product over the r coarse points, blocks in canonical order
        auto& arr = w[static_cast<std::size_t>(r)];
        Tuple y(static_cast<std::size_t>(r), 0);
        std::size_t idx = 0;
        do {
            double p = base;
            for (int i = 0; i < r; ++i)
                p *= laws[static_cast<std::size_t>(i)][y[static_cast<std::size_t>(i)]];
            arr[static_cast<Eigen::Index>(idx++)] += p;
        } while (r > 0 && next_tuple(s, y));
    }
    if (!(den > 0.0))
        throw DegenerateError("coarse-graining normalizer vanishes for the given parents");
    for (auto& arr : w) arr /= den;
    return SequenceDist(spec.coarse_space, std::move(w));
}

double renormalize_expectation(const RenormSpec& spec, const Tuple& parents,
                               const TestFunction& w) {
    return expectation_F(renormalize(spec, parents), w);
}

InteractionSpec as_interaction(const RenormSpec& spec) {
    check_renorm(spec);
    // psi only matters through its cardinality: one-point parameter space
    const DiscreteSpace zspace = DiscreteSpace::named({"slot"});
    const int top = static_cast<int>(spec.group_count_pmf.size()) - 1;
    std::vector<Eigen::ArrayXd> psi_w(static_cast<std::size_t>(std::max(top, 0)) + 1);
    for (int n = 0; n <= std::max(top, 0); ++n) {
        psi_w[static_cast<std::size_t>(n)] = Eigen::ArrayXd::Zero(1);
        if (n < spec.group_count_pmf.size())
            psi_w[static_cast<std::size_t>(n)][0] = spec.group_count_pmf[n];
    }
    InteractionSpec out{spec.fine_space,
                        spec.coarse_space,
                        SequenceDist(zspace, std::move(psi_w)),
                        spec.block_size_pmf,
                        Eigen::MatrixXd(),
                        nullptr};
    if (out.block_pmf.size() > 0) out.block_pmf[0] = 0.0;  // every slot takes a block
    const DiscreteSpace coarse = spec.coarse_space;
    const auto kernel = spec.block_kernel;
    out.conditional = [coarse, kernel](const Tuple& block, int) {
        if (block.empty()) return SequenceDist::empty_process(coarse);
        std::vector<Eigen::ArrayXd> w(2);
        w[0] = Eigen::ArrayXd::Zero(1);
        w[1] = kernel(block);
        return SequenceDist(coarse, std::move(w), AllowSubnormal{});
    };
    return out;
}

}  // namespace popcalc
