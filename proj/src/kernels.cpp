#include "popcalc/kernels.hpp"

#include <cmath>
#include <utility>

#include "popcalc/errors.hpp"

namespace popcalc {

TransitionKernel::TransitionKernel(DiscreteSpace in, DiscreteSpace out, int m_max,
                                   std::function<SequenceDist(const Tuple&)> conditional)
    : in_(std::move(in)), out_(std::move(out)), m_max_(m_max), conditional_(std::move(conditional)) {
    if (m_max_ < 0) throw DomainError("kernel cardinality cap must be non-negative");
    if (!conditional_) throw DomainError("kernel needs a conditional");
}

SequenceDist TransitionKernel::at(const Tuple& parents) const {
    if (static_cast<int>(parents.size()) > m_max_)
        throw DomainError("kernel not defined for parent cardinality " +
                          std::to_string(parents.size()));
    for (int p : parents)
        if (p < 0 || p >= in_.size()) throw DomainError("parent point outside the input space");
    SequenceDist d = conditional_(parents);
    if (!d.space().same_points(out_))
        throw DomainError("kernel conditional lives on the wrong space");
    return d;
}

TransitionKernel TransitionKernel::identity(const DiscreteSpace& space, int m_max) {
    return TransitionKernel(space, space, m_max, [space](const Tuple& parents) {
        const int n = static_cast<int>(parents.size());
        std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(n) + 1);
        for (int j = 0; j <= n; ++j)
            w[static_cast<std::size_t>(j)] =
                Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(space.size(), j)));
        w[static_cast<std::size_t>(n)][static_cast<Eigen::Index>(
            tuple_index(space.size(), parents))] = 1.0;
        return SequenceDist(space, std::move(w));
    });
}

SequenceDist bernoulli_daughter(const DiscreteSpace& out, const SingleObjectKernel& k, int source) {
    if (k.survival.size() <= source || source < 0)
        throw DomainError("survival table does not cover the source point");
    if (k.move.cols() != out.size() || k.move.rows() != k.survival.size())
        throw DomainError("move matrix shape mismatch");
    const double q = k.survival[source];
    if (q < 0.0 || q > 1.0 + 1e-12) throw DomainError("survival probability outside [0,1]");
    const double row_sum = k.move.row(source).sum();
    if (q > 0.0 && std::abs(row_sum - 1.0) > 1e-9)
        throw DomainError("move matrix row does not sum to one");
    std::vector<Eigen::ArrayXd> w(2);
    w[0] = Eigen::ArrayXd::Constant(1, 1.0 - q);
    w[1] = q * k.move.row(source).transpose().array();
    return SequenceDist(out, std::move(w));
}

TransitionKernel bernoulli_kernel(const DiscreteSpace& in, const DiscreteSpace& out,
                                  const SingleObjectKernel& k) {
    return TransitionKernel(in, out, 1, [out, k](const Tuple& parents) {
        if (parents.empty()) return SequenceDist::empty_process(out);
        return bernoulli_daughter(out, k, parents[0]);
    });
}

}  // namespace popcalc
