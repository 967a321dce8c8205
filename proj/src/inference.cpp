#include "popcalc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "popcalc/errors.hpp"
#include "popcalc/partitions.hpp"

namespace popcalc {

SequenceDist bayes_update(const SequenceDist& prior, const LikelihoodKernel& lik,
                          const Observation& obs) {
    if (!lik.input_space().same_points(prior.space()))
        throw DomainError("likelihood kernel input space does not match the prior");
    const int s = prior.space().size();
    std::vector<Eigen::ArrayXd> post(static_cast<std::size_t>(prior.n_max()) + 1);
    double evidence = 0.0;
    for (int n = 0; n <= prior.n_max(); ++n) {
        post[static_cast<std::size_t>(n)] = Eigen::ArrayXd::Zero(prior.weights(n).size());
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            const double p = prior.weights(n)[static_cast<Eigen::Index>(idx)];
            if (p > 0.0) {
                const double l = janossy(lik.at(t), obs);
                post[static_cast<std::size_t>(n)][static_cast<Eigen::Index>(idx)] = p * l;
                evidence += p * l;
            }
            ++idx;
        } while (n > 0 && next_tuple(s, t));
    }
    if (!(evidence > 0.0))
        throw DegenerateError("zero evidence for observation " +
                              tuple_to_string(lik.output_space(), obs));
    for (auto& arr : post) arr /= evidence;
    return SequenceDist(prior.space(), std::move(post));
}

double posterior_factorial_moment(const SequenceDist& prior, const LikelihoodKernel& lik,
                                  const Observation& obs, const Tuple& query) {
    if (!lik.input_space().same_points(prior.space()))
        throw DomainError("likelihood kernel input space does not match the prior");
    const int s = prior.space().size();
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= prior.n_max(); ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            const double p = prior.probability(t);
            if (p > 0.0) {
                const double l = p * janossy(lik.at(t), obs);
                den += l;
                if (l != 0.0 && static_cast<int>(query.size()) <= n)
                    num += l * counting_measure(t, query);
            }
        } while (n > 0 && next_tuple(s, t));
    }
    if (!(den > 0.0))
        throw DegenerateError("zero evidence for observation " +
                              tuple_to_string(lik.output_space(), obs));
    return num / den;
}

JointLikelihood janossy_likelihood(const LikelihoodKernel& lik) {
    return [lik](const Tuple& meas, const Tuple& states) { return janossy(lik.at(states), meas); };
}

ClutterModel ClutterModel::poisson(const DiscreteSpace& meas_space, const Eigen::ArrayXd& rate) {
    if (rate.size() != meas_space.size())
        throw DomainError("clutter rate array does not match the measurement space");
    if ((rate < 0).any()) throw DomainError("clutter rate must be non-negative");
    return ClutterModel{KhinchinFamily{meas_space, {rate}}};
}

ClutterModel ClutterModel::clusters(KhinchinFamily family) {
    for (std::size_t i = 0; i < family.clusters.size(); ++i) {
        if (static_cast<std::size_t>(family.clusters[i].size()) !=
            tuple_count(family.space.size(), static_cast<int>(i) + 1))
            throw DomainError("clutter cluster intensity for size " + std::to_string(i + 1) +
                              " has wrong array size");
        if ((family.clusters[i] < 0).any())
            throw DomainError("clutter cluster intensity must be non-negative");
    }
    return ClutterModel{std::move(family)};
}

double ClutterModel::block_intensity(const Tuple& meas) const {
    const int j = static_cast<int>(meas.size());
    if (j == 0 || j > family.max_cluster_size()) return 0.0;
    const auto& arr = family.clusters[static_cast<std::size_t>(j) - 1];
    const int s = family.space.size();
    // sum over all index orderings of the group (repeats counted per ordering)
    std::vector<int> pos(meas.size());
    std::iota(pos.begin(), pos.end(), 0);
    Tuple perm(meas.size());
    double total = 0.0;
    do {
        for (std::size_t i = 0; i < meas.size(); ++i)
            perm[i] = meas[static_cast<std::size_t>(pos[i])];
        total += arr[static_cast<Eigen::Index>(tuple_index(s, perm))];
    } while (std::next_permutation(pos.begin(), pos.end()));
    return total;
}

SequenceDist ClutterModel::process(int n_max, bool renormalize) const {
    return make_khinchin(family, n_max, renormalize);
}

namespace {

// one block of the joint partition: query states ω_x paired with observation
// labels ω_z. With queries present, sums the prior cluster intensity over all
// ways the queried points sit inside a larger cluster, remaining positions
// integrated out; without queries, adds the spurious-group intensity.
double block_factor(const KhinchinFamily& prior, const JointLikelihood& lik,
                    const ClutterModel& clutter, const Tuple& qx, const Tuple& qz) {
    const int s = prior.space.size();
    const int j = static_cast<int>(qx.size());
    double total = 0.0;
    if (j == 0) total += clutter.block_intensity(qz);
    for (int c = std::max(j, 1); c <= prior.max_cluster_size(); ++c) {
        const auto& arr = prior.clusters[static_cast<std::size_t>(c) - 1];
        // injective placements of the queried points into the c positions
        std::vector<int> slot(static_cast<std::size_t>(j), 0);
        std::vector<bool> used(static_cast<std::size_t>(c), false);
        Tuple filled(static_cast<std::size_t>(c), -1);
        auto rec = [&](auto&& self, int d) -> void {
            if (d == j) {
                // free positions run through the whole space
                std::vector<int> free_pos;
                for (int i = 0; i < c; ++i)
                    if (!used[static_cast<std::size_t>(i)]) free_pos.push_back(i);
                Tuple fill(free_pos.size(), 0);
                do {
                    for (std::size_t i = 0; i < free_pos.size(); ++i)
                        filled[static_cast<std::size_t>(free_pos[i])] = fill[i];
                    const double k = arr[static_cast<Eigen::Index>(tuple_index(s, filled))];
                    if (k != 0.0) total += k * lik(qz, filled);
                } while (!fill.empty() && next_tuple(s, fill));
                return;
            }
            for (int i = 0; i < c; ++i) {
                if (used[static_cast<std::size_t>(i)]) continue;
                used[static_cast<std::size_t>(i)] = true;
                filled[static_cast<std::size_t>(i)] = qx[static_cast<std::size_t>(d)];
                self(self, d + 1);
                used[static_cast<std::size_t>(i)] = false;
                filled[static_cast<std::size_t>(i)] = -1;
            }
        };
        rec(rec, 0);
    }
    return total;
}

}  // namespace

double khinchin_update(const KhinchinFamily& prior, const JointLikelihood& lik,
                       const ClutterModel& clutter, const Observation& obs, const Tuple& query) {
    if (!lik) throw DomainError("cluster update needs a joint likelihood");
    const int k = static_cast<int>(query.size());
    const int m = static_cast<int>(obs.size());
    if (k + m > kUpdateCap)
        throw DomainError("query and observation cardinalities " + std::to_string(k) + "+" +
                          std::to_string(m) + " beyond the partition cap");
    for (int q : query)
        if (q < 0 || q >= prior.space.size()) throw DomainError("query point outside the space");
    for (int z : obs)
        if (z < 0 || z >= clutter.family.space.size())
            throw DomainError("observation label outside the measurement space");

    // denominator: partitions of the observation indices alone
    double den = 0.0;
    {
        PartitionEnumerator en(m);
        Partition part;
        while (en.next(part)) {
            double term = 1.0;
            for (const auto& b : part.blocks) {
                Tuple qz;
                for (int e : b) qz.push_back(obs[static_cast<std::size_t>(e)]);
                term *= block_factor(prior, lik, clutter, {}, qz);
                if (term == 0.0) break;
            }
            den += term;
        }
    }
    if (!(den > 0.0))
        throw DegenerateError("evidence vanishes for observation " +
                              tuple_to_string(clutter.family.space, obs));

    // numerator: joint partitions of query points (first) and observation indices
    double num = 0.0;
    PartitionEnumerator en(k + m);
    Partition part;
    while (en.next(part)) {
        double term = 1.0;
        for (const auto& b : part.blocks) {
            Tuple qx, qz;
            for (int e : b) {
                if (e < k)
                    qx.push_back(query[static_cast<std::size_t>(e)]);
                else
                    qz.push_back(obs[static_cast<std::size_t>(e - k)]);
            }
            term *= block_factor(prior, lik, clutter, qx, qz);
            if (term == 0.0) break;
        }
        num += term;
    }
    return num / den;
}

Eigen::ArrayXd phd_update(const Eigen::ArrayXd& lambda1, const Eigen::ArrayXd& miss,
                          const Eigen::MatrixXd& detect, const Eigen::ArrayXd& clutter_rate,
                          const Observation& obs) {
    const auto s = lambda1.size();
    if (miss.size() != s || detect.rows() != s)
        throw DomainError("per-object likelihood shapes do not match the state space");
    if (clutter_rate.size() != detect.cols())
        throw DomainError("clutter rate does not match the measurement space");
    if ((lambda1 < 0).any()) throw DomainError("intensity must be non-negative");
    for (Eigen::Index x = 0; x < s; ++x)
        if (std::abs(miss[x] + detect.row(x).sum() - 1.0) > 1e-9)
            throw DomainError("miss and detection probabilities must sum to one per state");
    Eigen::ArrayXd out = miss * lambda1;
    for (int z : obs) {
        if (z < 0 || z >= detect.cols()) throw DomainError("observation label outside the space");
        const double c = clutter_rate[z] + (detect.col(z).array() * lambda1).sum();
        if (!(c > 0.0))
            throw DegenerateError("evidence vanishes for measurement label " + std::to_string(z));
        out += detect.col(z).array() * lambda1 / c;
    }
    return out;
}

Eigen::ArrayXd GaussPoissonPrior::lambda2_sym() const {
    const auto s = static_cast<Eigen::Index>(space.size());
    Eigen::ArrayXd sym(s * s);
    for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = 0; b < s; ++b)
            sym[a * s + b] = 0.5 * (lambda2[a * s + b] + lambda2[b * s + a]);
    return sym;
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> gauss_poisson_update(const GaussPoissonPrior& prior,
                                                               const PairLikelihood& lik,
                                                               const Eigen::ArrayXd& clutter_rate,
                                                               const Observation& obs) {
    const auto s = static_cast<Eigen::Index>(prior.space.size());
    const auto zn = lik.detect1.cols();
    if (prior.lambda1.size() != s || prior.lambda2.size() != s * s)
        throw DomainError("prior intensity shapes do not match the space");
    if ((prior.lambda1 < 0).any() || (prior.lambda2 < 0).any())
        throw DomainError("intensity must be non-negative");
    if (lik.miss1.size() != s || lik.detect1.rows() != s || lik.miss2.size() != s * s ||
        lik.detect2.rows() != s * s || lik.detect2.cols() != zn || clutter_rate.size() != zn)
        throw DomainError("pair likelihood shapes do not match the spaces");
    for (Eigen::Index x = 0; x < s; ++x)
        if (std::abs(lik.miss1[x] + lik.detect1.row(x).sum() - 1.0) > 1e-9)
            throw DomainError("single-source likelihood must be normalized per state");
    for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = 0; b < s; ++b) {
            const auto p = a * s + b, q = b * s + a;
            if (std::abs(lik.miss2[p] + lik.detect2.row(p).sum() - 1.0) > 1e-9)
                throw DomainError("pair likelihood must be normalized per source pair");
            if (std::abs(lik.miss2[p] - lik.miss2[q]) > 1e-12 ||
                (zn > 0 &&
                 (lik.detect2.row(p) - lik.detect2.row(q)).cwiseAbs().maxCoeff() > 1e-12))
                throw DomainError("pair likelihood must be symmetric in the source pair");
        }

    const Eigen::ArrayXd l2s = prior.lambda2_sym();
    // single-query block factor: the queried point alone or inside a pair
    const auto F = [&](int zcol, Eigen::Index x) {
        double v = (zcol < 0 ? lik.miss1[x] : lik.detect1(x, zcol)) * prior.lambda1[x];
        for (Eigen::Index xb = 0; xb < s; ++xb) {
            const auto p = x * s + xb;
            v += 2.0 * (zcol < 0 ? lik.miss2[p] : lik.detect2(p, zcol)) * l2s[p];
        }
        return v;
    };
    const auto F2 = [&](int zcol, Eigen::Index p) {
        return 2.0 * (zcol < 0 ? lik.miss2[p] : lik.detect2(p, zcol)) * l2s[p];
    };

    const int m = static_cast<int>(obs.size());
    std::vector<double> c(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const int z = obs[static_cast<std::size_t>(i)];
        if (z < 0 || z >= zn) throw DomainError("observation label outside the space");
        double ci = clutter_rate[z] + (lik.detect1.col(z).array() * prior.lambda1).sum() +
                    (lik.detect2.col(z).array() * l2s).sum();
        if (!(ci > 0.0))
            throw DegenerateError("evidence vanishes for measurement label " + std::to_string(z));
        c[static_cast<std::size_t>(i)] = ci;
    }

    Eigen::ArrayXd m1(s);
    for (Eigen::Index x = 0; x < s; ++x) {
        double v = F(-1, x);
        for (int i = 0; i < m; ++i)
            v += F(obs[static_cast<std::size_t>(i)], x) / c[static_cast<std::size_t>(i)];
        m1[x] = v;
    }

    Eigen::ArrayXd m2(s * s);
    for (Eigen::Index x1 = 0; x1 < s; ++x1)
        for (Eigen::Index x2 = 0; x2 < s; ++x2) {
            const auto p = x1 * s + x2;
            double v = F2(-1, p) + F(-1, x1) * F(-1, x2);
            for (int i = 0; i < m; ++i) {
                const int zi = obs[static_cast<std::size_t>(i)];
                const double ci = c[static_cast<std::size_t>(i)];
                v += (F2(zi, p) + F(zi, x1) * F(-1, x2) + F(-1, x1) * F(zi, x2)) / ci;
                for (int jj = 0; jj < m; ++jj) {
                    if (jj == i) continue;
                    v += F(zi, x1) * F(obs[static_cast<std::size_t>(jj)], x2) /
                         (ci * c[static_cast<std::size_t>(jj)]);
                }
            }
            m2[p] = v;
        }
    return {std::move(m1), std::move(m2)};
}

namespace {

struct SlotEvidence {
    double mass = 0.0;
    Eigen::ArrayXd posterior;  // normalized marginal, valid when mass > 0
};

SlotEvidence slot_evidence(const SlotLikelihood& lk, const Eigen::ArrayXd& marginal,
                           const Tuple& meas) {
    Eigen::ArrayXd weighted;
    if (meas.empty()) {
        weighted = lk.miss * marginal;
    } else if (meas.size() == 1) {
        weighted = lk.detect.col(meas[0]).array() * marginal;
    } else {
        if (!lk.subsets) return {};
        weighted.resize(marginal.size());
        for (Eigen::Index x = 0; x < marginal.size(); ++x)
            weighted[x] = lk.subsets(meas, static_cast<int>(x)) * marginal[x];
    }
    const double mass = weighted.sum();
    if (!(mass > 0.0)) return {};
    return {mass, weighted / mass};
}

}  // namespace

ConjugateFamilyState independent_update(const ConjugateFamilyState& prior,
                                        const std::vector<SlotLikelihood>& lik,
                                        const SequenceDist& clutter, const Observation& obs,
                                        bool at_most_one, int max_hypotheses, double prune_below) {
    const int s = prior.space.size();
    const int m = static_cast<int>(obs.size());
    const int zn = clutter.space().size();
    if (static_cast<int>(lik.size()) < prior.max_slots())
        throw DomainError("need one slot likelihood per slot");
    for (const auto& lk : lik) {
        if (lk.miss.size() != s || lk.detect.rows() != s)
            throw DomainError("slot likelihood shapes do not match the state space");
        if (lk.detect.cols() != zn)
            throw DomainError("slot likelihood does not match the measurement space");
        for (Eigen::Index x = 0; x < s; ++x)
            if (std::abs(lk.miss[x] + lk.detect.row(x).sum() - 1.0) > 1e-9 && !lk.subsets)
                throw DomainError("slot likelihood must be normalized per state");
    }
    for (int z : obs)
        if (z < 0 || z >= zn) throw DomainError("observation label outside the measurement space");

    double count = 0.0;
    for (const auto& h : prior.hypotheses)
        count += std::pow(static_cast<double>(h.slots.size()) + 1.0, m);
    if (count > static_cast<double>(max_hypotheses))
        throw DomainError("association enumeration needs " + std::to_string(count) +
                          " hypotheses, above the cap of " + std::to_string(max_hypotheses));

    ConjugateFamilyState out{prior.space, {}};
    double total = 0.0;
    for (const auto& hyp : prior.hypotheses) {
        if (hyp.weight <= 0.0) continue;
        const int slots = static_cast<int>(hyp.slots.size());
        // assignment odometer: each observation goes to clutter (0) or a slot
        std::vector<int> assign(static_cast<std::size_t>(m), 0);
        while (true) {
            std::vector<Tuple> groups(static_cast<std::size_t>(slots) + 1);
            for (int i = 0; i < m; ++i)
                groups[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(
                    obs[static_cast<std::size_t>(i)]);
            bool feasible = true;
            if (at_most_one)
                for (int j = 1; j <= slots && feasible; ++j)
                    feasible = groups[static_cast<std::size_t>(j)].size() <= 1;
            if (feasible) {
                double w = hyp.weight * janossy(clutter, groups[0]);
                std::vector<Eigen::ArrayXd> post_slots(hyp.slots.size());
                for (int j = 1; j <= slots && w > 0.0; ++j) {
                    const auto ev =
                        slot_evidence(lik[static_cast<std::size_t>(j) - 1],
                                      hyp.slots[static_cast<std::size_t>(j) - 1],
                                      groups[static_cast<std::size_t>(j)]);
                    w *= ev.mass;
                    if (ev.mass > 0.0) post_slots[static_cast<std::size_t>(j) - 1] = ev.posterior;
                }
                if (w > 0.0) {
                    out.hypotheses.push_back({w, std::move(post_slots)});
                    total += w;
                }
            }
            int i = m - 1;
            for (; i >= 0; --i) {
                if (++assign[static_cast<std::size_t>(i)] <= slots) break;
                assign[static_cast<std::size_t>(i)] = 0;
            }
            if (i < 0) break;
        }
    }
    if (!(total > 0.0))
        throw DegenerateError("no association explains observation " +
                              tuple_to_string(clutter.space(), obs));
    for (auto& h : out.hypotheses) h.weight /= total;
    if (prune_below > 0.0) {
        std::vector<ConjugateHypothesis> kept;
        double kept_mass = 0.0;
        for (auto& h : out.hypotheses) {
            if (h.weight >= prune_below) {
                kept_mass += h.weight;
                kept.push_back(std::move(h));
            }
        }
        if (kept.empty()) throw DegenerateError("pruning removed every hypothesis");
        for (auto& h : kept) h.weight /= kept_mass;
        out.hypotheses = std::move(kept);
    }
    return out;
}

std::vector<SequenceDist> smooth(const std::vector<SequenceDist>& filtered,
                                 const std::vector<TransitionKernel>& kernels) {
    if (filtered.empty()) throw DomainError("need at least one filtered step");
    if (kernels.size() + 1 != filtered.size())
        throw DomainError("need exactly one kernel per adjacent step pair");
    std::vector<SequenceDist> out;
    out.reserve(filtered.size());
    out.push_back(filtered.back());
    for (int t = static_cast<int>(kernels.size()) - 1; t >= 0; --t) {
        const auto& filt = filtered[static_cast<std::size_t>(t)];
        const auto& kern = kernels[static_cast<std::size_t>(t)];
        const auto& next = out.back();
        const SequenceDist pred = chapman_kolmogorov(filt, kern);
        const int s_next = next.space().size();
        // backward ratio per future tuple
        std::vector<std::pair<Tuple, double>> ratios;
        for (int n = 0; n <= next.n_max(); ++n) {
            Tuple x(static_cast<std::size_t>(n), 0);
            do {
                const double sm = next.probability(x);
                if (sm > 0.0) {
                    const double pr = pred.probability(x);
                    if (!(pr > 0.0))
                        throw DegenerateError(
                            "smoothing step " + std::to_string(t + 1) +
                            ": prediction gives zero mass to tuple " +
                            tuple_to_string(next.space(), x));
                    ratios.emplace_back(x, sm / pr);
                }
            } while (n > 0 && next_tuple(s_next, x));
        }
        const int s = filt.space().size();
        std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(filt.n_max()) + 1);
        for (int n = 0; n <= filt.n_max(); ++n) {
            w[static_cast<std::size_t>(n)] = Eigen::ArrayXd::Zero(filt.weights(n).size());
            Tuple y(static_cast<std::size_t>(n), 0);
            std::size_t idx = 0;
            do {
                const double fy = filt.weights(n)[static_cast<Eigen::Index>(idx)];
                if (fy > 0.0) {
                    const auto cond = kern.at(y);
                    double mix = 0.0;
                    for (const auto& [x, r] : ratios) mix += cond.probability(x) * r;
                    w[static_cast<std::size_t>(n)][static_cast<Eigen::Index>(idx)] = fy * mix;
                }
                ++idx;
            } while (n > 0 && next_tuple(s, y));
        }
        out.emplace_back(filt.space(), std::move(w));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace popcalc
