#pragma once

// Joint law of two populations on separate spaces, one dense array per
// cardinality pair. Used for parent/daughter expectations and as the
// exhaustive oracle for two-step smoothing.

#include "popcalc/kernels.hpp"
#include "popcalc/sequence_dist.hpp"

namespace popcalc {

class JointDist {
public:
    // weights[n][m] over X^n x Z^m, row-major with the first population's
    // tuple index most significant
    JointDist(DiscreteSpace first, DiscreteSpace second,
              std::vector<std::vector<Eigen::ArrayXd>> weights);

    const DiscreteSpace& first_space() const { return first_; }
    const DiscreteSpace& second_space() const { return second_; }
    int first_max() const { return static_cast<int>(weights_.size()) - 1; }
    int second_max(int n) const;
    const Eigen::ArrayXd& weights(int n, int m) const;
    double probability(const Tuple& a, const Tuple& b) const;
    double mass() const;

    SequenceDist first_margin() const;
    SequenceDist second_margin() const;

private:
    DiscreteSpace first_;
    DiscreteSpace second_;
    std::vector<std::vector<Eigen::ArrayXd>> weights_;
};

// parents drawn from the prior, daughters from the kernel conditional
JointDist make_joint(const SequenceDist& prior, const TransitionKernel& kernel);

// E[prod w1 over the first population * prod w2 over the second]
double joint_expectation(const JointDist& joint, const TestFunction& w1, const TestFunction& w2);

}  // namespace popcalc
