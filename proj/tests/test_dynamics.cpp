#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "popcalc/dynamics.hpp"
#include "popcalc/errors.hpp"
#include "test_util.hpp"

using namespace popcalc;

namespace {

TestFunction random_w(CounterRng& rng, int s) {
    TestFunction w(s);
    for (int i = 0; i < s; ++i) w[i] = rng.uniform01();
    return w;
}

// kernel whose conditionals are drawn once per parent tuple and then frozen
TransitionKernel frozen_random_kernel(CounterRng& rng, const DiscreteSpace& in,
                                      const DiscreteSpace& out, int m_max, int d_max) {
    std::map<Tuple, SequenceDist> table;
    for (int n = 0; n <= m_max; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            table.emplace(t, testutil::random_sequence_dist(rng, out, d_max));
        } while (n > 0 && next_tuple(in.size(), t));
    }
    return TransitionKernel(in, out, m_max,
                            [table](const Tuple& parents) { return table.at(parents); });
}

}  // namespace

TEST_CASE("joint parent-daughter expectation: nested route agrees with the direct sum") {
    CounterRng rng(61);
    const auto xs = DiscreteSpace::with_size(2);
    const auto ys = DiscreteSpace::named({"u", "v", "w"});
    for (int trial = 0; trial < 5; ++trial) {
        const auto prior = testutil::random_sequence_dist(rng, xs, 2);
        const auto kernel = frozen_random_kernel(rng, xs, ys, 2, 2);
        const auto joint = make_joint(prior, kernel);
        CHECK(joint.mass() == doctest::Approx(1.0).epsilon(1e-12));
        const auto wp = random_w(rng, 2);
        const auto wd = random_w(rng, 3);
        // factored route through the kernel
        double nested = 0.0;
        for (int n = 0; n <= prior.n_max(); ++n) {
            Tuple t(static_cast<std::size_t>(n), 0);
            do {
                const double p = prior.probability(t);
                if (p > 0.0) {
                    double prod = p;
                    for (int i = 0; i < n; ++i) prod *= wp[t[static_cast<std::size_t>(i)]];
                    nested += prod * expectation_F(kernel.at(t), wd);
                }
            } while (n > 0 && next_tuple(xs.size(), t));
        }
        CHECK(std::abs(hierarchical_expectation(joint, wp, wd) - nested) < 1e-12);
        CHECK(hierarchical_expectation(joint, TestFunction::Ones(2), TestFunction::Ones(3)) ==
              doctest::Approx(1.0).epsilon(1e-12));
        // daughters integrated out leaves the parent expectation
        CHECK(std::abs(hierarchical_expectation(joint, wp, TestFunction::Ones(3)) -
                       expectation_F(prior, wp)) < 1e-12);
        // margins match the inputs
        const auto margin = joint.first_margin();
        for (int n = 0; n <= prior.n_max(); ++n)
            for (Eigen::Index i = 0; i < prior.weights(n).size(); ++i)
                CHECK(margin.weights(n)[i] == doctest::Approx(prior.weights(n)[i]).epsilon(1e-12));
    }
}

namespace {

// deterministic grouping process with exactly k identical slots
SequenceDist fixed_slot_count(int k) {
    const auto zspace = DiscreteSpace::named({"slot"});
    std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(k) + 1);
    for (int n = 0; n <= k; ++n) w[static_cast<std::size_t>(n)] = Eigen::ArrayXd::Zero(1);
    w[static_cast<std::size_t>(k)][0] = 1.0;
    return SequenceDist(zspace, std::move(w));
}

InteractionSpec multiplicative_spec(const DiscreteSpace& parent_space,
                                    const DiscreteSpace& daughter_space, int k,
                                    std::map<int, SequenceDist> per_parent) {
    Eigen::ArrayXd pp(2);
    pp << 0.0, 1.0;  // every slot takes exactly one parent
    return InteractionSpec{parent_space,
                           daughter_space,
                           fixed_slot_count(k),
                           pp,
                           Eigen::MatrixXd(),
                           [per_parent](const Tuple& block, int) {
                               REQUIRE(block.size() == 1);
                               return per_parent.at(block[0]);
                           }};
}

}  // namespace

TEST_CASE("one-parent-per-slot interaction multiplies per-parent expectations") {
    CounterRng rng(71);
    const auto xs = DiscreteSpace::with_size(3);
    const auto ys = DiscreteSpace::with_size(2);
    for (int k = 1; k <= 4; ++k) {
        std::map<int, SequenceDist> per_parent;
        for (int x = 0; x < 3; ++x)
            per_parent.emplace(x, testutil::random_sequence_dist(rng, ys, 2));
        const auto spec = multiplicative_spec(xs, ys, k, per_parent);
        Tuple parents;
        for (int i = 0; i < k; ++i) parents.push_back(rng.uniform_int(0, 2));
        const auto w = random_w(rng, 2);
        double expect = 1.0;
        for (int x : parents) expect *= expectation_F(per_parent.at(x), w);
        CHECK(std::abs(interacting_conditional(spec, parents, w) - expect) < 1e-12);
        CHECK(interacting_conditional(spec, parents, TestFunction::Ones(2)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("interaction with no parents averages the parentless slots") {
    CounterRng rng(81);
    const auto xs = DiscreteSpace::with_size(2);
    const auto ys = DiscreteSpace::with_size(2);
    const auto zspace = DiscreteSpace::with_size(2);
    const auto psi = testutil::random_sequence_dist(rng, zspace, 2);
    std::map<int, SequenceDist> by_z;
    by_z.emplace(0, testutil::random_sequence_dist(rng, ys, 1));
    by_z.emplace(1, testutil::random_sequence_dist(rng, ys, 1));
    Eigen::ArrayXd pp(2);
    pp << 0.4, 0.6;
    const InteractionSpec spec{
        xs, ys, psi, pp, Eigen::MatrixXd(),
        [by_z](const Tuple& block, int z) {
            REQUIRE(block.empty());
            return by_z.at(z);
        }};
    const auto w = random_w(rng, 2);
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= psi.n_max(); ++n) {
        Tuple z(static_cast<std::size_t>(n), 0);
        do {
            const double pz = psi.probability(z);
            double tn = pz, td = pz;
            for (int i = 0; i < n; ++i) {
                tn *= pp[0] * expectation_F(by_z.at(z[static_cast<std::size_t>(i)]), w);
                td *= pp[0];
            }
            num += tn;
            den += td;
        } while (n > 0 && next_tuple(2, z));
    }
    CHECK(std::abs(interacting_conditional(spec, {}, w) - num / den) < 1e-14);
}

TEST_CASE("vanishing interaction normalizer is refused") {
    const auto xs = DiscreteSpace::with_size(2);
    const auto ys = DiscreteSpace::with_size(2);
    Eigen::ArrayXd pp(2);
    pp << 1.0, 0.0;  // no slot may take a parent
    const InteractionSpec spec{
        xs, ys, fixed_slot_count(1), pp, Eigen::MatrixXd(),
        [ys](const Tuple&, int) { return SequenceDist::empty_process(ys); }};
    CHECK_THROWS_AS(interacting_conditional(spec, {0}, TestFunction::Ones(2)), DegenerateError);
}

TEST_CASE("interaction kernel: one parent per slot factorizes into a concatenation") {
    CounterRng rng(91);
    const auto xs = DiscreteSpace::with_size(2);
    const auto ys = DiscreteSpace::with_size(2);
    for (int trial = 0; trial < 3; ++trial) {
        std::map<int, SequenceDist> per_parent;
        for (int x = 0; x < 2; ++x)
            per_parent.emplace(x, testutil::random_sequence_dist(rng, ys, 1));
        const int k = 2;
        const auto spec = multiplicative_spec(xs, ys, k, per_parent);
        const Tuple parents = {rng.uniform_int(0, 1), rng.uniform_int(0, 1)};
        const auto assembled = interacting_kernel_dist(spec, parents, k);
        CHECK(assembled.mass() == doctest::Approx(1.0).epsilon(1e-9));
        // independent construction: daughters of each parent laid end to end
        auto oracle = per_parent.at(parents[0]);
        oracle = superpose(oracle, per_parent.at(parents[1]));
        // the partition route only sees the symmetrized law
        for (int l = 0; l <= k; ++l) {
            Tuple y(static_cast<std::size_t>(l), 0);
            do {
                CHECK(std::abs(janossy(assembled, y) - janossy(oracle, y)) < 1e-12);
            } while (l > 0 && next_tuple(2, y));
        }
    }
}

TEST_CASE("interaction kernel: moment output is the moment of the assembled law") {
    CounterRng rng(101);
    const auto xs = DiscreteSpace::with_size(2);
    const auto ys = DiscreteSpace::with_size(2);
    const auto zspace = DiscreteSpace::with_size(2);
    // frozen random conditionals for every (block value tuple, slot point)
    std::map<std::pair<Tuple, int>, SequenceDist> table;
    for (int n = 0; n <= 2; ++n) {
        Tuple b(static_cast<std::size_t>(n), 0);
        do {
            for (int z = 0; z < 2; ++z)
                table.emplace(std::make_pair(b, z), testutil::random_sequence_dist(rng, ys, 1));
        } while (n > 0 && next_tuple(2, b));
    }
    Eigen::ArrayXd pp(3);
    pp << 0.3, 0.5, 0.2;
    const InteractionSpec spec{
        xs, ys, testutil::random_sequence_dist(rng, zspace, 2), pp, Eigen::MatrixXd(),
        [table](const Tuple& block, int z) { return table.at(std::make_pair(block, z)); }};
    const Tuple parents = {0, 1};
    const auto assembled = interacting_kernel_dist(spec, parents, 2);
    CHECK(assembled.mass() == doctest::Approx(1.0).epsilon(1e-9));
    for (int l = 0; l <= 2; ++l) {
        Tuple y(static_cast<std::size_t>(l), 0);
        do {
            const auto [p_w, m_w] = interacting_kernel(spec, parents, y);
            CHECK(std::abs(p_w - assembled.probability(y)) < 1e-12);
            CHECK(std::abs(m_w - factorial_moment(assembled, y)) < 1e-12);
        } while (l > 0 && next_tuple(2, y));
    }
    // expectation through the assembled law matches the conditional-expectation route
    for (int trial = 0; trial < 4; ++trial) {
        const auto w = random_w(rng, 2);
        CHECK(std::abs(expectation_F(assembled, w) - interacting_conditional(spec, parents, w)) <
              1e-12);
    }
}

TEST_CASE("population mixture transition") {
    CounterRng rng(111);
    const auto xs = DiscreteSpace::with_size(2);
    const auto prior = testutil::random_sequence_dist(rng, xs, 3);

    SUBCASE("identity kernel keeps the prior") {
        const auto out = chapman_kolmogorov(prior, TransitionKernel::identity(xs, 3));
        for (int n = 0; n <= 3; ++n)
            for (Eigen::Index i = 0; i < prior.weights(n).size(); ++i)
                CHECK(out.weights(n)[i] == doctest::Approx(prior.weights(n)[i]).epsilon(1e-12));
    }

    SUBCASE("point prior returns the conditional at that point") {
        std::vector<Eigen::ArrayXd> w(3);
        w[0] = Eigen::ArrayXd::Zero(1);
        w[1] = Eigen::ArrayXd::Zero(2);
        w[2] = Eigen::ArrayXd::Zero(4);
        w[2][2] = 1.0;  // the pair (b,a)
        const SequenceDist point(xs, std::move(w));
        const auto kernel = frozen_random_kernel(rng, xs, xs, 2, 2);
        const auto out = chapman_kolmogorov(point, kernel);
        const auto cond = kernel.at({1, 0});
        for (int n = 0; n <= cond.n_max(); ++n)
            for (Eigen::Index i = 0; i < cond.weights(n).size(); ++i)
                CHECK(out.weights(n)[i] == doctest::Approx(cond.weights(n)[i]).epsilon(1e-12));
    }

    SUBCASE("moments mix like the law") {
        const auto kernel = frozen_random_kernel(rng, xs, xs, 3, 2);
        const auto out = chapman_kolmogorov(prior, kernel);
        CHECK(out.mass() == doctest::Approx(1.0).epsilon(1e-12));
        for (const Tuple& q : {Tuple{}, Tuple{0}, Tuple{1}, Tuple{0, 1}, Tuple{1, 1}}) {
            double mixed = 0.0;
            for (int n = 0; n <= prior.n_max(); ++n) {
                Tuple t(static_cast<std::size_t>(n), 0);
                do {
                    const double p = prior.probability(t);
                    if (p > 0.0) mixed += p * factorial_moment(kernel.at(t), q);
                } while (n > 0 && next_tuple(2, t));
            }
            CHECK(std::abs(factorial_moment(out, q) - mixed) < 1e-12);
        }
    }
}

TEST_CASE("branching: survival thinning for one parent, concatenation for two") {
    const auto xs = DiscreteSpace::with_size(2);
    SingleObjectKernel k;
    k.survival = Eigen::ArrayXd::Constant(2, 0.7);
    k.move = Eigen::MatrixXd(2, 2);
    k.move << 0.0, 1.0, 1.0, 0.0;  // swap
    const auto per_point = bernoulli_kernel(xs, xs, k);
    const auto branch = branching_kernel(per_point, SequenceDist::empty_process(xs), 2);

    const auto one = branch.at({0});
    CHECK(one.probability({}) == doctest::Approx(0.3));
    CHECK(one.probability({1}) == doctest::Approx(0.7));
    CHECK(one.probability({0}) == doctest::Approx(0.0));

    SingleObjectKernel sure = k;
    sure.survival = Eigen::ArrayXd::Constant(2, 1.0);
    const auto branch2 = branching_kernel(bernoulli_kernel(xs, xs, sure),
                                          SequenceDist::empty_process(xs), 2);
    const auto two = branch2.at({0, 1});
    CHECK(two.probability({1, 0}) == doctest::Approx(1.0));
    CHECK(two.probability({0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("branching: labeled partition sum equals the superposition construction") {
    CounterRng rng(121);
    const auto xs = DiscreteSpace::with_size(3);
    for (int trial = 0; trial < 4; ++trial) {
        const auto per_point = frozen_random_kernel(rng, xs, xs, 1, 1);
        Eigen::ArrayXd lambda(3);
        lambda << 0.2 * rng.uniform01() + 0.05, 0.2 * rng.uniform01() + 0.05,
            0.2 * rng.uniform01() + 0.05;
        const auto birth = make_poisson(xs, lambda, 3, /*renormalize=*/true);
        const int m = 2;
        const auto branch = branching_kernel(per_point, birth, m);
        const Tuple parents = {rng.uniform_int(0, 2), rng.uniform_int(0, 2)};
        const auto built = branch.at(parents);
        // independent route: assign each daughter position to the birth group
        // or one parent, multiply the group symmetric densities
        for (int l = 0; l <= 3; ++l) {
            Tuple y(static_cast<std::size_t>(l), 0);
            do {
                double total = 0.0;
                std::vector<int> assign(static_cast<std::size_t>(l), 0);
                while (true) {
                    std::vector<Tuple> groups(static_cast<std::size_t>(m) + 1);
                    for (int i = 0; i < l; ++i)
                        groups[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]
                            .push_back(y[static_cast<std::size_t>(i)]);
                    double term = janossy(birth, groups[0]);
                    for (int j = 1; j <= m && term != 0.0; ++j)
                        term *= janossy(per_point.at({parents[static_cast<std::size_t>(j - 1)]}),
                                        groups[static_cast<std::size_t>(j)]);
                    total += term;
                    int i = l - 1;
                    for (; i >= 0; --i) {
                        if (++assign[static_cast<std::size_t>(i)] <= m) break;
                        assign[static_cast<std::size_t>(i)] = 0;
                    }
                    if (i < 0) break;
                }
                CHECK(std::abs(janossy(built, y) - total) < 1e-12);
            } while (l > 0 && next_tuple(3, y));
        }
    }
}

TEST_CASE("offspring recursion pins the textbook extinction values") {
    Eigen::ArrayXd g(3), start(2);
    g << 0.5, 0.0, 0.5;
    start << 0.0, 1.0;
    const auto pmfs = galton_watson(g, start, 2, 8);
    REQUIRE(pmfs.size() == 3);
    CHECK(pmfs[0][1] == doctest::Approx(1.0));
    CHECK(pmfs[1][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pmfs[2][0] == doctest::Approx(0.625).epsilon(1e-12));

    Eigen::ArrayXd one_child(2);
    one_child << 0.0, 1.0;
    for (const auto& pmf : galton_watson(one_child, start, 4, 4))
        CHECK(pmf[1] == doctest::Approx(1.0));

    Eigen::ArrayXd death(1);
    death << 1.0;
    const auto dead = galton_watson(death, start, 2, 4);
    CHECK(dead[1][0] == doctest::Approx(1.0));
    CHECK(dead[2][0] == doctest::Approx(1.0));
}

TEST_CASE("offspring recursion refuses an overflowing cap and matches the mixture route") {
    Eigen::ArrayXd g(3), start(2);
    g << 0.25, 0.25, 0.5;
    start << 0.0, 1.0;
    CHECK_THROWS_AS(galton_watson(g, start, 6, 4), DomainError);

    // single-point-space reduction
    const auto xs = DiscreteSpace::named({"o"});
    Eigen::ArrayXd g2(3);
    g2 << 0.5, 0.0, 0.5;
    const auto pmfs = galton_watson(g2, start, 4, 16);
    std::vector<Eigen::ArrayXd> w(2);
    w[0] = Eigen::ArrayXd::Zero(1);
    w[1] = Eigen::ArrayXd::Ones(1);
    SequenceDist cur(xs, std::move(w));
    const TransitionKernel per_point(xs, xs, 1, [xs, g2](const Tuple& parents) {
        if (parents.empty()) return SequenceDist::empty_process(xs);
        std::vector<Eigen::ArrayXd> c(3);
        for (int n = 0; n < 3; ++n) c[static_cast<std::size_t>(n)] = g2.segment(n, 1);
        return SequenceDist(xs, std::move(c));
    });
    for (int t = 1; t <= 4; ++t) {
        cur = chapman_kolmogorov(
            cur, branching_kernel(per_point, SequenceDist::empty_process(xs), cur.n_max()));
        const auto pmf = cardinality_pmf(cur);
        for (int n = 0; n < pmf.size(); ++n)
            CHECK(pmf[n] == doctest::Approx(pmfs[static_cast<std::size_t>(t)][n]).epsilon(1e-12));
    }
}

TEST_CASE("family prediction: deterministic move shifts the marginal") {
    const auto xs = DiscreteSpace::with_size(2);
    Eigen::ArrayXd m(2);
    m << 0.3, 0.7;
    ConjugateFamilyState st{xs, {{1.0, {m}}}};
    SingleObjectKernel k;
    k.survival = Eigen::ArrayXd::Constant(2, 1.0);
    k.move = Eigen::MatrixXd(2, 2);
    k.move << 0.0, 1.0, 1.0, 0.0;
    ConjugateFamilyState none{xs, {{1.0, {}}}};
    const auto out = predict_independent(st, {k}, none);
    REQUIRE(out.hypotheses.size() == 1);
    REQUIRE(out.hypotheses[0].slots.size() == 1);
    CHECK(out.hypotheses[0].slots[0][0] == doctest::Approx(0.7));
    CHECK(out.hypotheses[0].slots[0][1] == doctest::Approx(0.3));
}

TEST_CASE("family prediction: constant survival thins the cardinality binomially") {
    const auto xs = DiscreteSpace::with_size(2);
    Eigen::ArrayXd m(2);
    m << 0.5, 0.5;
    ConjugateFamilyState st{xs, {{1.0, {m, m}}}};
    SingleObjectKernel k;
    k.survival = Eigen::ArrayXd::Constant(2, 0.6);
    k.move = Eigen::MatrixXd::Identity(2, 2);
    ConjugateFamilyState none{xs, {{1.0, {}}}};
    const auto out = predict_independent(st, {k, k}, none);
    const auto pmf = cardinality_pmf(out.assemble());
    CHECK(pmf[0] == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(pmf[1] == doctest::Approx(0.48).epsilon(1e-12));
    CHECK(pmf[2] == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("family prediction equals the mixture-transition oracle") {
    CounterRng rng(131);
    const auto xs = DiscreteSpace::with_size(3);
    for (int trial = 0; trial < 4; ++trial) {
        ConjugateFamilyState prior{xs, {}};
        prior.hypotheses.push_back({0.6, {testutil::random_simplex(rng, 3)}});
        prior.hypotheses.push_back(
            {0.4, {testutil::random_simplex(rng, 3), testutil::random_simplex(rng, 3)}});
        std::vector<SingleObjectKernel> kernels(2);
        for (auto& k : kernels) {
            k.survival = Eigen::ArrayXd(3);
            for (int i = 0; i < 3; ++i) k.survival[i] = rng.uniform01();
            k.move = Eigen::MatrixXd(3, 3);
            for (int r = 0; r < 3; ++r) k.move.row(r) = testutil::random_simplex(rng, 3).matrix();
        }
        Eigen::ArrayXd bcard(2);
        bcard << 0.7, 0.3;
        const auto birth = ConjugateFamilyState::independent_family(
            xs, bcard, {{}, {testutil::random_simplex(rng, 3)}});
        const auto predicted = predict_independent(prior, kernels, birth);
        CHECK(predicted.total_weight() == doctest::Approx(1.0).epsilon(1e-12));

        const auto birth_dist = birth.assemble();
        const TransitionKernel oracle_kernel(
            xs, xs, 2, [xs, kernels, birth_dist](const Tuple& parents) {
                SequenceDist out = birth_dist;
                for (std::size_t j = 0; j < parents.size(); ++j)
                    out = superpose(out, bernoulli_daughter(xs, kernels[j], parents[j]));
                return out;
            });
        const auto oracle = chapman_kolmogorov(prior.assemble(), oracle_kernel);
        const auto assembled = predicted.assemble(oracle.n_max());
        for (int n = 0; n <= oracle.n_max(); ++n)
            for (Eigen::Index i = 0; i < oracle.weights(n).size(); ++i)
                CHECK(std::abs(assembled.weights(n)[i] - oracle.weights(n)[i]) < 1e-12);
    }
}

TEST_CASE("family prediction enforces the hypothesis cap") {
    const auto xs = DiscreteSpace::with_size(2);
    Eigen::ArrayXd m(2);
    m << 0.5, 0.5;
    ConjugateFamilyState st{xs, {{1.0, {m}}}};
    SingleObjectKernel k;
    k.survival = Eigen::ArrayXd::Constant(2, 0.5);
    k.move = Eigen::MatrixXd::Identity(2, 2);
    ConjugateFamilyState none{xs, {{1.0, {}}}};
    CHECK_THROWS_AS(predict_independent(st, {k}, none, /*max_hypotheses=*/1), DomainError);
}

namespace {

RenormSpec majority_spec(double p) {
    RenormSpec spec;
    spec.fine_space = DiscreteSpace::with_size(3);  // three sites
    spec.coarse_space = DiscreteSpace::named({"down", "up"});
    spec.group_count_pmf = Eigen::ArrayXd::Zero(2);
    spec.group_count_pmf[1] = 1.0;  // exactly one coarse block
    spec.block_size_pmf = Eigen::ArrayXd::Zero(4);
    spec.block_size_pmf[3] = 1.0;  // blocks of three sites
    spec.block_kernel = [p](const Tuple& block) {
        // sites carry independent up-spins; the block reports its majority
        Eigen::ArrayXd law = Eigen::ArrayXd::Zero(2);
        const int n = static_cast<int>(block.size());
        for (int mask = 0; mask < (1 << n); ++mask) {
            double prob = 1.0;
            int ups = 0;
            for (int i = 0; i < n; ++i) {
                if (mask & (1 << i)) {
                    prob *= p;
                    ++ups;
                } else {
                    prob *= 1.0 - p;
                }
            }
            law[2 * ups > n ? 1 : 0] += prob;
        }
        return law;
    };
    return spec;
}

}  // namespace

TEST_CASE("majority coarse-graining at p = 0.6 gives 0.648") {
    const auto spec = majority_spec(0.6);
    const auto coarse = renormalize(spec, {0, 1, 2});
    REQUIRE(coarse.n_max() >= 1);
    CHECK(std::abs(coarse.probability({1}) - 0.648) < 1e-12);
    CHECK(std::abs(coarse.probability({0}) - 0.352) < 1e-12);
    TestFunction w(2);
    w << 0.0, 1.0;
    CHECK(std::abs(renormalize_expectation(spec, {0, 1, 2}, w) - 0.648) < 1e-12);
    CHECK(renormalize_expectation(spec, {0, 1, 2}, TestFunction::Ones(2)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infeasible blocks drop from both sides of the coarse-graining ratio") {
    RenormSpec spec;
    spec.fine_space = DiscreteSpace::with_size(3);
    spec.fine_space.coords = Eigen::MatrixXd(3, 1);
    spec.fine_space.coords << 0.0, 1.0, 2.0;
    spec.coarse_space = DiscreteSpace::with_size(2);
    spec.group_count_pmf = Eigen::ArrayXd::Zero(4);
    spec.group_count_pmf[1] = 0.5;
    spec.group_count_pmf[3] = 0.5;
    spec.block_size_pmf = Eigen::ArrayXd::Zero(4);
    spec.block_size_pmf[1] = 0.4;
    spec.block_size_pmf[3] = 0.6;
    const auto coords = spec.fine_space.coords;
    const double radius = 1.0;
    spec.block_kernel = [coords, radius](const Tuple& block) {
        Eigen::ArrayXd law(2);
        law << 0.25, 0.75;
        for (std::size_t a = 0; a < block.size(); ++a)
            for (std::size_t b = a + 1; b < block.size(); ++b)
                if (std::abs(coords(block[a], 0) - coords(block[b], 0)) > radius)
                    return Eigen::ArrayXd(Eigen::ArrayXd::Zero(2));
        return law;
    };
    // the triple block spans distance 2 and is infeasible, so only the
    // all-singletons grouping survives
    const auto coarse = renormalize(spec, {0, 1, 2});
    CHECK(cardinality_pmf(coarse)[3] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coarse.probability({1, 1, 1}) == doctest::Approx(0.75 * 0.75 * 0.75).epsilon(1e-12));

    // a group-count law that cannot partition three sites is degenerate
    RenormSpec bad = spec;
    bad.group_count_pmf = Eigen::ArrayXd::Zero(3);
    bad.group_count_pmf[2] = 1.0;
    bad.block_size_pmf = Eigen::ArrayXd::Zero(4);
    bad.block_size_pmf[3] = 1.0;
    CHECK_THROWS_AS(renormalize(bad, {0, 1, 2}), DegenerateError);
}

TEST_CASE("coarse-graining agrees with the interaction machinery") {
    CounterRng rng(141);
    for (int trial = 0; trial < 4; ++trial) {
        RenormSpec spec;
        spec.fine_space = DiscreteSpace::with_size(2);
        spec.coarse_space = DiscreteSpace::with_size(2);
        Eigen::ArrayXd groups(4);
        for (int i = 0; i < 4; ++i) groups[i] = 0.1 + rng.uniform01();
        spec.group_count_pmf = groups / groups.sum();
        spec.block_size_pmf = Eigen::ArrayXd(4);
        spec.block_size_pmf << 0.0, 0.5, 0.3, 0.2;
        std::map<Tuple, Eigen::ArrayXd> laws;
        for (int n = 1; n <= 3; ++n) {
            Tuple b(static_cast<std::size_t>(n), 0);
            do {
                Eigen::ArrayXd law(2);
                law << 0.5 * rng.uniform01(), 0.5 * rng.uniform01();
                laws.emplace(b, law);  // sub-normalized on purpose
            } while (next_tuple(2, b));
        }
        spec.block_kernel = [laws](const Tuple& block) { return laws.at(block); };
        const Tuple parents = {0, 1, 1};
        const auto direct = renormalize(spec, parents);
        const auto inter = as_interaction(spec);
        for (int t2 = 0; t2 < 3; ++t2) {
            const auto w = random_w(rng, 2);
            CHECK(std::abs(expectation_F(direct, w) - interacting_conditional(inter, parents, w)) <
                  1e-12);
        }
        const auto assembled = interacting_kernel_dist(inter, parents, 3);
        for (int l = 0; l <= 3; ++l) {
            Tuple y(static_cast<std::size_t>(l), 0);
            do {
                CHECK(std::abs(janossy(assembled, y) - janossy(direct, y)) < 1e-12);
            } while (l > 0 && next_tuple(2, y));
        }
    }
}
