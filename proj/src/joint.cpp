#include "popcalc/joint.hpp"

#include <cmath>
#include <utility>

#include "popcalc/errors.hpp"

namespace popcalc {

JointDist::JointDist(DiscreteSpace first, DiscreteSpace second,
                     std::vector<std::vector<Eigen::ArrayXd>> weights)
    : first_(std::move(first)), second_(std::move(second)), weights_(std::move(weights)) {
    if (weights_.empty()) throw DomainError("joint distribution needs a cardinality-0 row");
    double total = 0.0;
    for (std::size_t n = 0; n < weights_.size(); ++n) {
        if (weights_[n].empty()) throw DomainError("joint row without columns");
        for (std::size_t m = 0; m < weights_[n].size(); ++m) {
            const auto expect = tuple_count(first_.size(), static_cast<int>(n)) *
                                tuple_count(second_.size(), static_cast<int>(m));
            if (static_cast<std::size_t>(weights_[n][m].size()) != expect)
                throw DomainError("joint weight array has wrong size at (" + std::to_string(n) +
                                  "," + std::to_string(m) + ")");
            if ((weights_[n][m] < -1e-12).any()) throw DomainError("negative joint weight");
            total += weights_[n][m].sum();
        }
    }
    if (std::abs(total - 1.0) > SequenceDist::kMassTolerance)
        throw DomainError("joint mass " + std::to_string(total) + " is not one");
}

int JointDist::second_max(int n) const {
    if (n < 0 || n > first_max()) throw DomainError("cardinality out of range");
    return static_cast<int>(weights_[static_cast<std::size_t>(n)].size()) - 1;
}

const Eigen::ArrayXd& JointDist::weights(int n, int m) const {
    if (n < 0 || n > first_max() || m < 0 || m > second_max(n))
        throw DomainError("cardinality pair out of range");
    return weights_[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
}

double JointDist::probability(const Tuple& a, const Tuple& b) const {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    if (n > first_max() || m > second_max(n)) return 0.0;
    const auto span = tuple_count(second_.size(), m);
    return weights(n, m)[static_cast<Eigen::Index>(tuple_index(first_.size(), a) * span +
                                                   tuple_index(second_.size(), b))];
}

double JointDist::mass() const {
    double total = 0.0;
    for (const auto& row : weights_)
        for (const auto& arr : row) total += arr.sum();
    return total;
}

SequenceDist JointDist::first_margin() const {
    std::vector<Eigen::ArrayXd> w(weights_.size());
    for (std::size_t n = 0; n < weights_.size(); ++n) {
        const auto cells = tuple_count(first_.size(), static_cast<int>(n));
        w[n] = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(cells));
        for (const auto& arr : weights_[n]) {
            const Eigen::Index span = arr.size() / static_cast<Eigen::Index>(cells);
            for (std::size_t i = 0; i < cells; ++i)
                w[n][static_cast<Eigen::Index>(i)] +=
                    arr.segment(static_cast<Eigen::Index>(i) * span, span).sum();
        }
    }
    return SequenceDist(first_, std::move(w));
}

SequenceDist JointDist::second_margin() const {
    int m_top = 0;
    for (int n = 0; n <= first_max(); ++n) m_top = std::max(m_top, second_max(n));
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(m_top) + 1);
    for (int m = 0; m <= m_top; ++m)
        w[static_cast<std::size_t>(m)] =
            Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(tuple_count(second_.size(), m)));
    for (int n = 0; n <= first_max(); ++n) {
        const auto cells = tuple_count(first_.size(), n);
        for (int m = 0; m <= second_max(n); ++m) {
            const auto& arr = weights(n, m);
            const Eigen::Index span = static_cast<Eigen::Index>(tuple_count(second_.size(), m));
            for (std::size_t i = 0; i < cells; ++i)
                w[static_cast<std::size_t>(m)] +=
                    arr.segment(static_cast<Eigen::Index>(i) * span, span);
        }
    }
    return SequenceDist(second_, std::move(w));
}

JointDist make_joint(const SequenceDist& prior, const TransitionKernel& kernel) {
    if (!prior.space().same_points(kernel.input_space()))
        throw DomainError("prior space does not match the kernel input space");
    if (kernel.m_max() < prior.n_max())
        throw DomainError("kernel does not cover the prior's cardinalities");
    const DiscreteSpace& zs = kernel.output_space();
    std::vector<std::vector<Eigen::ArrayXd>> w(static_cast<std::size_t>(prior.n_max()) + 1);
    for (int n = 0; n <= prior.n_max(); ++n) {
        const auto cells = tuple_count(prior.space().size(), n);
        // find the daughter cap for this parent cardinality
        int m_top = 0;
        {
            Tuple t(static_cast<std::size_t>(n), 0);
            do {
                if (prior.probability(t) > 0.0)
                    m_top = std::max(m_top, kernel.at(t).n_max());
            } while (n > 0 && next_tuple(prior.space().size(), t));
        }
        auto& row = w[static_cast<std::size_t>(n)];
        row.resize(static_cast<std::size_t>(m_top) + 1);
        for (int m = 0; m <= m_top; ++m)
            row[static_cast<std::size_t>(m)] = Eigen::ArrayXd::Zero(
                static_cast<Eigen::Index>(cells * tuple_count(zs.size(), m)));
        Tuple t(static_cast<std::size_t>(n), 0);
        std::size_t idx = 0;
        do {
            const double p = prior.probability(t);
            if (p > 0.0) {
                const auto cond = kernel.at(t);
                for (int m = 0; m <= cond.n_max(); ++m) {
                    const Eigen::Index span = cond.weights(m).size();
                    row[static_cast<std::size_t>(m)].segment(
                        static_cast<Eigen::Index>(idx) * span, span) += p * cond.weights(m);
                }
            }
            ++idx;
        } while (n > 0 && next_tuple(prior.space().size(), t));
    }
    return JointDist(prior.space(), zs, std::move(w));
}

double joint_expectation(const JointDist& joint, const TestFunction& w1, const TestFunction& w2) {
    if (w1.size() != joint.first_space().size() || w2.size() != joint.second_space().size())
        throw DomainError("test function size mismatch");
    double total = 0.0;
    for (int n = 0; n <= joint.first_max(); ++n) {
        for (int m = 0; m <= joint.second_max(n); ++m) {
            const auto& arr = joint.weights(n, m);
            Tuple a(static_cast<std::size_t>(n), 0);
            std::size_t ia = 0;
            const auto span = tuple_count(joint.second_space().size(), m);
            do {
                double prod_a = 1.0;
                for (int i = 0; i < n; ++i) prod_a *= w1[a[static_cast<std::size_t>(i)]];
                if (prod_a != 0.0) {
                    Tuple b(static_cast<std::size_t>(m), 0);
                    std::size_t ib = 0;
                    do {
                        double prod = prod_a;
                        for (int j = 0; j < m; ++j) prod *= w2[b[static_cast<std::size_t>(j)]];
                        total += arr[static_cast<Eigen::Index>(ia * span + ib)] * prod;
                        ++ib;
                    } while (m > 0 && next_tuple(joint.second_space().size(), b));
                }
                ++ia;
            } while (n > 0 && next_tuple(joint.first_space().size(), a));
        }
    }
    return total;
}

}  // namespace popcalc
