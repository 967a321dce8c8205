#pragma once

// Population-level Bayes updates: the exhaustive enumeration oracle, clustered
// moment updates and their classical closed forms, conjugate independent
// updates, and backward smoothing.

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "popcalc/dynamics.hpp"
#include "popcalc/kernels.hpp"
#include "popcalc/sequence_dist.hpp"

namespace popcalc {

// ordered measurement labels
using Observation = Tuple;

// Exhaustive-enumeration posterior: weights proportional to
// prior(x_{1:n}) times the symmetric density of obs under lik.at(x_{1:n}).
// Reweights only, never reorders, so non-symmetric priors keep their ordering.
// Every specialized update below is checked against this.
SequenceDist bayes_update(const SequenceDist& prior, const LikelihoodKernel& lik,
                          const Observation& obs);

// Ratio of counting-measure expectations: E[C(query) L(obs)] / E[L(obs)].
// Agrees with factorial_moment(bayes_update(...), query) by construction.
double posterior_factorial_moment(const SequenceDist& prior, const LikelihoodKernel& lik,
                                  const Observation& obs, const Tuple& query);

// Symmetric group density of a measurement subset produced by one source
// group: (meas labels, source states) -> density. Multi-measurement subsets
// must be handled (return 0 when the model forbids them).
using JointLikelihood = std::function<double(const Tuple& meas, const Tuple& states)>;

// adapts a measurement kernel: the group density is the janossy of the
// kernel's conditional at the measurement tuple
JointLikelihood janossy_likelihood(const LikelihoodKernel& lik);

// Spurious measurements as a cluster family over the measurement space. The
// per-group intensity enters the partition sums block by block; the classical
// independent-clutter case puts all mass on single measurements.
struct ClutterModel {
    KhinchinFamily family;

    static ClutterModel poisson(const DiscreteSpace& meas_space, const Eigen::ArrayXd& rate);
    static ClutterModel clusters(KhinchinFamily family);

    // sum of the cluster intensity over orderings of the group; 0 for empty
    // groups and groups beyond the family's largest cluster
    double block_intensity(const Tuple& meas) const;

    // assembled clutter process, for oracle comparisons
    SequenceDist process(int n_max, bool renormalize = false) const;
};

// elements partitioned jointly: query points and observation indices
inline constexpr int kUpdateCap = 8;

// Posterior factorial moment of a cluster-family prior given obs: the double
// partition sum pairing query points and observation indices into blocks,
// with free cluster positions integrated out, over the evidence partition sum.
double khinchin_update(const KhinchinFamily& prior, const JointLikelihood& lik,
                       const ClutterModel& clutter, const Observation& obs, const Tuple& query);

// Classical first-moment update for an independent-point prior with
// at-most-one measurement per object. detect is states x measurements,
// miss + detect row sums must be 1.
Eigen::ArrayXd phd_update(const Eigen::ArrayXd& lambda1, const Eigen::ArrayXd& miss,
                          const Eigen::MatrixXd& detect, const Eigen::ArrayXd& clutter_rate,
                          const Observation& obs);

// first- and second-order cluster prior: single points plus ordered pairs
struct GaussPoissonPrior {
    DiscreteSpace space;
    Eigen::ArrayXd lambda1;  // over X
    Eigen::ArrayXd lambda2;  // over ordered pairs, row-major

    Eigen::ArrayXd lambda2_sym() const;  // (lambda2(a,b) + lambda2(b,a)) / 2
};

// at-most-one measurement per source group, for singles and pairs
struct PairLikelihood {
    Eigen::ArrayXd miss1;     // P(no measurement | x)
    Eigen::MatrixXd detect1;  // P(z | x), states x measurements
    Eigen::ArrayXd miss2;     // P(no measurement | x1, x2), ordered pairs
    Eigen::MatrixXd detect2;  // P(z | x1, x2), ordered pairs x measurements
};

// Closed-form first and second posterior moments under occlusion: pairs can
// produce one shared measurement. Returns (M1 over X, M2 over ordered pairs).
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> gauss_poisson_update(const GaussPoissonPrior& prior,
                                                               const PairLikelihood& lik,
                                                               const Eigen::ArrayXd& clutter_rate,
                                                               const Observation& obs);

// per-slot single-object measurement model
struct SlotLikelihood {
    Eigen::ArrayXd miss;      // P(no measurement | x)
    Eigen::MatrixXd detect;   // P(z | x), states x measurements
    // optional symmetric multi-measurement density (meas labels, state);
    // absent = at most one measurement per slot
    std::function<double(const Tuple&, int)> subsets;
};

// Conjugate update of an independent-slot family: posterior hypotheses are
// (prior hypothesis, association of observations to slots or clutter), with
// slot marginals reweighted by their assigned evidence. The assembled
// posterior equals bayes_update of the assembled prior exactly.
ConjugateFamilyState independent_update(const ConjugateFamilyState& prior,
                                        const std::vector<SlotLikelihood>& lik,
                                        const SequenceDist& clutter, const Observation& obs,
                                        bool at_most_one = true, int max_hypotheses = 100000,
                                        double prune_below = 0.0);

// Backward smoothing pass: kernels[t] maps step t to t+1, filtered has one
// entry per step. Output[t] conditions filtered[t] on everything after it via
// the Bayes ratio against the one-step-ahead prediction.
std::vector<SequenceDist> smooth(const std::vector<SequenceDist>& filtered,
                                 const std::vector<TransitionKernel>& kernels);

}  // namespace popcalc
