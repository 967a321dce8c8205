#pragma once

// Distributions of finite point sequences: one dense weight array per
// cardinality, over ordered tuples. The ordered (non-symmetric) weights are
// primary; symmetric summaries (permutation-summed and injection-summed
// densities) are derived from them.

#include <Eigen/Dense>
#include <vector>

#include "popcalc/space.hpp"

namespace popcalc {

using TestFunction = Eigen::ArrayXd;  // one value per space point

// tag for conditional sub-laws whose missing mass encodes infeasibility
struct AllowSubnormal {};

class SequenceDist {
public:
    // weights[n] has space.size()^n entries; total mass must sit within
    // kMassTolerance of one and entries must be non-negative.
    SequenceDist(DiscreteSpace space, std::vector<Eigen::ArrayXd> weights);
    // relaxed form: mass anywhere in [0, 1]
    SequenceDist(DiscreteSpace space, std::vector<Eigen::ArrayXd> weights, AllowSubnormal);

    static constexpr double kMassTolerance = 1e-9;

    // the process that is surely empty
    static SequenceDist empty_process(DiscreteSpace space);

    const DiscreteSpace& space() const { return space_; }
    int n_max() const { return static_cast<int>(weights_.size()) - 1; }
    const Eigen::ArrayXd& weights(int n) const;
    double mass() const;

    double probability(const Tuple& t) const;  // 0 beyond n_max

private:
    DiscreteSpace space_;
    std::vector<Eigen::ArrayXd> weights_;
};

// E[w(X_1) ... w(X_N)]: same w in every slot. w >= 0 not required.
double expectation_F(const SequenceDist& d, const TestFunction& w);
// per-slot version; needs at least n_max entries
double expectation_F(const SequenceDist& d, const std::vector<TestFunction>& slot_w);

// permutation sum of ordered weights at the tuple
double janossy(const SequenceDist& d, const Tuple& t);

// expected number of ordered injections of the query into a realization,
// computed by pinning query points into slot positions and marginalizing
double factorial_moment(const SequenceDist& d, const Tuple& query);

// ordered injections of query into one realization (the per-realization count)
double counting_measure(const Tuple& realization, const Tuple& query);

Eigen::ArrayXd cardinality_pmf(const SequenceDist& d);
Eigen::ArrayXd intensity(const SequenceDist& d);  // first-order moment per point

// concatenation of independent processes on the same space (this first)
SequenceDist superpose(const SequenceDist& a, const SequenceDist& b);

// --- constructors -----------------------------------------------------------

// cardinality pmf + per-cardinality slot marginals: weight(x_1..x_n) =
// p(n) * prod_i marginals[n][i][x_i]
SequenceDist make_independent(const DiscreteSpace& space, const Eigen::ArrayXd& card_pmf,
                              const std::vector<std::vector<Eigen::ArrayXd>>& marginals);

struct BernoulliComponent {
    double q = 0.0;            // presence probability
    Eigen::ArrayXd location;   // distribution over the space when present
};

// components independently present; present ones appear in component order
SequenceDist make_multi_bernoulli(const DiscreteSpace& space,
                                  const std::vector<BernoulliComponent>& components);

// literal product-weight form: weight over n-tuples proportional to
// prod_i q[n][i] * prod_i marginals[n][i][x_i], normalized at the end.
// Comparison-only: coincides with make_multi_bernoulli for identical
// components and matched q rows.
SequenceDist make_multi_bernoulli_literal(
    const DiscreteSpace& space, const std::vector<std::vector<double>>& q,
    const std::vector<std::vector<Eigen::ArrayXd>>& marginals);

// truncation above n_max: tail must stay under kTailTolerance unless
// renormalize is set; otherwise a DomainError reports the tail mass
inline constexpr double kTailTolerance = 1e-10;

SequenceDist make_poisson(const DiscreteSpace& space, const Eigen::ArrayXd& lambda, int n_max,
                          bool renormalize = false);

// cluster intensity family: clusters[k] is the intensity over X^(k+1) for
// clusters of k+1 points (all clusters non-empty)
struct KhinchinFamily {
    DiscreteSpace space;
    std::vector<Eigen::ArrayXd> clusters;

    int max_cluster_size() const { return static_cast<int>(clusters.size()); }
    double total_intensity() const;  // sum over all cluster types and positions
};

// compound-Poisson realization: Poisson(total) many clusters, concatenated
SequenceDist make_khinchin(const KhinchinFamily& family, int n_max, bool renormalize = false);

// exp(-K0 + sum_k K_k[w x ... x w]) — closed form, no truncation
double khinchin_pgfl(const KhinchinFamily& family, const TestFunction& w);

}  // namespace popcalc
