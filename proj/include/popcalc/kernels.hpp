#pragma once

// Markov transitions between population states: a conditional sequence
// distribution per parent tuple. Likelihood kernels are the same object with
// the measurement space as output.

#include <functional>

#include "popcalc/sequence_dist.hpp"

namespace popcalc {

class TransitionKernel {
public:
    // conditional(parents) must return a normalized SequenceDist on `out`
    // for every parent tuple up to cardinality m_max
    TransitionKernel(DiscreteSpace in, DiscreteSpace out, int m_max,
                     std::function<SequenceDist(const Tuple&)> conditional);

    const DiscreteSpace& input_space() const { return in_; }
    const DiscreteSpace& output_space() const { return out_; }
    int m_max() const { return m_max_; }

    // validates cardinality and that the conditional lives on the output space
    SequenceDist at(const Tuple& parents) const;

    static TransitionKernel identity(const DiscreteSpace& space, int m_max);

private:
    DiscreteSpace in_;
    DiscreteSpace out_;
    int m_max_;
    std::function<SequenceDist(const Tuple&)> conditional_;
};

using LikelihoodKernel = TransitionKernel;

// one object either disappears or moves to a single destination
struct SingleObjectKernel {
    Eigen::ArrayXd survival;  // per source point, in [0,1]
    Eigen::MatrixXd move;     // rows = source, cols = destination, row-stochastic
};

// daughter law for one parent point under a survival-and-move kernel
SequenceDist bernoulli_daughter(const DiscreteSpace& out, const SingleObjectKernel& k, int source);

// m_max-parent kernel defined on single parents (empty parents -> empty law)
TransitionKernel bernoulli_kernel(const DiscreteSpace& in, const DiscreteSpace& out,
                                  const SingleObjectKernel& k);

}  // namespace popcalc
