#pragma once

// Population transitions: parent/daughter expectations, interaction-driven
// conditionals and kernels built from partition sums over a grouping process,
// the multi-object Chapman-Kolmogorov mixture, branching, the Galton-Watson
// cardinality recursion, conjugate independent-family prediction, and
// many-to-one coarse-graining.

#include <functional>
#include <utility>

#include "popcalc/joint.hpp"
#include "popcalc/kernels.hpp"
#include "popcalc/sequence_dist.hpp"

namespace popcalc {

// direct double sum over the joint; the factored route
// sum_parents P(parents) * prod w_p * E[prod w_d | parents] must agree
double hierarchical_expectation(const JointDist& joint, const TestFunction& w_parent,
                                const TestFunction& w_daughter);

// Interaction model: a grouping process psi supplies slots; parents are
// partitioned into blocks, blocks feed slots in canonical order, every slot
// runs a conditional daughter process. p_p weighs block sizes (0 = slot with
// no parents).
struct InteractionSpec {
    DiscreteSpace parent_space;
    DiscreteSpace daughter_space;
    SequenceDist psi;           // explicit finite grouping process
    Eigen::ArrayXd block_pmf;   // p_p by block size; entry 0 = parentless slot
    // optional per-slot-point override: row = psi point, col = block size
    Eigen::MatrixXd block_pmf_by_z;
    // daughter law given a parent block (canonical order, possibly empty)
    // and the psi point feeding it
    std::function<SequenceDist(const Tuple& block, int z)> conditional;

    double p_block(int size, int z) const;
};

inline constexpr int kInteractionCap = 8;

// normalized conditional expectation of prod w over the daughters given the
// parent tuple; partition sum over parent groupings against psi
double interacting_conditional(const InteractionSpec& spec, const Tuple& parents,
                               const TestFunction& w);

// per-tuple conditional weights: ordered probability and factorial moment of
// the daughter process given the parents, via the mixed partition sum over
// daughters and parents together
std::pair<double, double> interacting_kernel(const InteractionSpec& spec, const Tuple& parents,
                                             const Tuple& daughters);

// the probability outputs assembled into a normalized daughter law
SequenceDist interacting_kernel_dist(const InteractionSpec& spec, const Tuple& parents,
                                     int daughter_cap);

// prior-weighted mixture of kernel conditionals
SequenceDist chapman_kolmogorov(const SequenceDist& prior, const TransitionKernel& kernel);

// each parent spawns independently through per_point; one birth group leads.
// Equals the labeled-partition sum with one birth block and per-parent blocks.
TransitionKernel branching_kernel(const TransitionKernel& per_point, const SequenceDist& birth,
                                  int m_max);

// cardinality pmfs after 0..steps generations of i.i.d. offspring; pgf given
// by its coefficient array. Tail beyond n_cap above kGaltonWatsonTail fails.
inline constexpr double kGaltonWatsonTail = 1e-9;
std::vector<Eigen::ArrayXd> galton_watson(const Eigen::ArrayXd& offspring_pmf,
                                          const Eigen::ArrayXd& initial_pmf, int steps, int n_cap);

// mixture of independent per-slot products, closed under prediction and
// Bayes updates
struct ConjugateHypothesis {
    double weight = 0.0;
    std::vector<Eigen::ArrayXd> slots;  // one normalized marginal per object
};

struct ConjugateFamilyState {
    DiscreteSpace space;
    std::vector<ConjugateHypothesis> hypotheses;

    double total_weight() const;
    int max_slots() const;
    // mixture of slot products; n_max defaults to the widest hypothesis
    SequenceDist assemble(int n_max = -1) const;

    static ConjugateFamilyState independent_family(
        const DiscreteSpace& space, const Eigen::ArrayXd& card_pmf,
        const std::vector<std::vector<Eigen::ArrayXd>>& marginals);
};

// survival-and-move prediction with independent birth; hypotheses become
// (birth hypothesis, prior hypothesis, survivor subset), birth slots leading.
// slot_kernels[j] drives slot j of every hypothesis.
ConjugateFamilyState predict_independent(const ConjugateFamilyState& state,
                                         const std::vector<SingleObjectKernel>& slot_kernels,
                                         const ConjugateFamilyState& birth,
                                         int max_hypotheses = 100000, double prune_below = 0.0);

// many-to-one coarse-graining: parents are partitioned, each block emits one
// coarse point; p_psi weighs the block count, p_t the block sizes. The block
// kernel may be sub-normalized (zero mass = infeasible block); infeasible
// blocks drop from numerator and normalizer alike.
struct RenormSpec {
    DiscreteSpace fine_space;
    DiscreteSpace coarse_space;
    Eigen::ArrayXd group_count_pmf;  // by number of blocks
    Eigen::ArrayXd block_size_pmf;   // by block size; entry 0 ignored
    std::function<Eigen::ArrayXd(const Tuple& block)> block_kernel;
};

SequenceDist renormalize(const RenormSpec& spec, const Tuple& parents);
double renormalize_expectation(const RenormSpec& spec, const Tuple& parents,
                               const TestFunction& w);
// the same model expressed through the interaction machinery (one-point psi
// parameter space, cardinality pmf = group count pmf)
InteractionSpec as_interaction(const RenormSpec& spec);

}  // namespace popcalc
