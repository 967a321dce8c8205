#include "popcalc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "popcalc/calculus.hpp"
#include "popcalc/config.hpp"
#include "popcalc/errors.hpp"
#include "popcalc/extraction.hpp"
#include "popcalc/inference.hpp"
#include "popcalc/partitions.hpp"

namespace popcalc {

namespace {

struct CheckDef {
    const char* suite;
    const char* name;
    double tolerance;
    // returns the observed error; throwing fails the check
    std::function<double(const VerifyOptions&, std::string& note)> body;
};

Eigen::ArrayXd rand_simplex(CounterRng& rng, int n) {
    Eigen::ArrayXd v(n);
    for (int i = 0; i < n; ++i) v[i] = 0.05 + rng.uniform01();
    return v / v.sum();
}

Polynomial<double> rand_poly(CounterRng& rng, int dim, int max_deg, int terms) {
    Polynomial<double> p(dim);
    for (int t = 0; t < terms; ++t) {
        Monomial m;
        for (int v = 0; v < dim; ++v) {
            const int e = rng.uniform_int(0, max_deg);
            if (e > 0) m.push_back({v, e});
        }
        p.add_term(m, -1.0 + 2.0 * rng.uniform01());
    }
    return p;
}

PolyFunctional rand_map(CounterRng& rng, int in, int out, int max_deg) {
    PolyFunctional f;
    f.in_dim = in;
    for (int o = 0; o < out; ++o) f.components.push_back(rand_poly(rng, in, max_deg, 4));
    return f;
}

SequenceDist rand_dist(CounterRng& rng, const DiscreteSpace& space, int n_max) {
    std::vector<Eigen::ArrayXd> w;
    double total = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        Eigen::ArrayXd arr(static_cast<Eigen::Index>(tuple_count(space.size(), n)));
        for (Eigen::Index i = 0; i < arr.size(); ++i) arr[i] = rng.uniform01();
        total += arr.sum();
        w.push_back(std::move(arr));
    }
    for (auto& arr : w) arr /= total;
    return SequenceDist(space, std::move(w));
}

double bell_count_check(const VerifyOptions& opts, std::string&) {
    double err = 0.0;
    for (int n = 0; n <= 10; ++n) {
        PartitionEnumerator en(n);
        Partition p;
        std::uint64_t count = 0;
        while (en.next(p)) ++count;
        std::uint64_t expected = bell_number(n);
        if (opts.inject_failure && n == 10) ++expected;
        err = std::max(err, std::abs(static_cast<double>(count) -
                                     static_cast<double>(expected)));
    }
    return err;
}

double restricted_filter_check(const VerifyOptions&, std::string&) {
    const std::vector<GroundSet> grounds = {GroundSet::mixed(2, 2), GroundSet::mixed(3, 1),
                                            GroundSet::mixed(1, 3), GroundSet::states(4)};
    const std::vector<PartitionConstraint> cons = {
        PartitionConstraint::branching(), PartitionConstraint::association(),
        PartitionConstraint::at_most_one_measurement()};
    double err = 0.0;
    for (const auto& g : grounds)
        for (const auto& c : cons) {
            const auto fast = enumerate_restricted(g, c);
            std::vector<Partition> slow;
            for (const auto& p : enumerate_partitions(g.size()))
                if (c.admits(p, g)) slow.push_back(p);
            err += fast != slow;
        }
    return err;
}

double canonical_format_check(const VerifyOptions&, std::string&) {
    const std::vector<std::string> expected = {"{1,2,3}", "{1,2}|{3}", "{1,3}|{2}", "{1}|{2,3}",
                                              "{1}|{2}|{3}"};
    const auto got = enumerate_partitions(3);
    double err = got.size() != expected.size();
    for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i)
        err += got[i].to_string() != expected[i];
    return err;
}

double constraint_name_check(const VerifyOptions&, std::string&) {
    double err = 0.0;
    err += constraint_from_name("unrestricted").kind != ConstraintKind::Unrestricted;
    err += constraint_from_name("branching").kind != ConstraintKind::Branching;
    err += constraint_from_name("association").kind != ConstraintKind::Association;
    err += constraint_from_name("at_most_one_measurement").kind !=
           ConstraintKind::AtMostOneMeasurement;
    try {
        constraint_from_name("no-such-constraint");
        err += 1.0;
    } catch (const DomainError&) {
    }
    return err;
}

double faa_di_bruno_check(const VerifyOptions&, std::string&) {
    CounterRng rng(11);
    double err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = rand_map(rng, 2, 2, 2);
        const auto f = rand_map(rng, 2, 1, 2);
        Eigen::VectorXd x(2);
        x << rng.uniform01(), rng.uniform01();
        const int order = 1 + trial % 3;
        DirectionSet dirs;
        for (int k = 0; k < order; ++k) {
            Eigen::VectorXd d(2);
            d << -1.0 + 2.0 * rng.uniform01(), -1.0 + 2.0 * rng.uniform01();
            dirs.push_back(d);
        }
        const auto lhs = faa_di_bruno(f, g, x, dirs);
        const auto rhs = composite_differential_reference(f, g, x, dirs);
        const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
        err = std::max(err, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    }
    return err;
}

double total_decomposition_check(const VerifyOptions&, std::string&) {
    CounterRng rng(12);
    double err = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = rand_map(rng, 3, 1, 3);
        Eigen::VectorXd x(3), d(3);
        for (int i = 0; i < 3; ++i) {
            x[i] = rng.uniform01();
            d[i] = -1.0 + 2.0 * rng.uniform01();
        }
        const auto td = total_differential_decomposition(f, x, d);
        double sum = 0.0;
        for (const double p : td.partials) sum += p;
        err = std::max(err, std::abs(td.total - sum));
    }
    return err;
}

double multilinear_check(const VerifyOptions&, std::string&) {
    CounterRng rng(13);
    // bilinear form over two slots of width 2
    PolyFunctional F;
    F.in_dim = 4;
    Polynomial<double> p(4);
    Eigen::MatrixXd a(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            a(i, j) = -1.0 + 2.0 * rng.uniform01();
            p.add_term({{i, 1}, {2 + j, 1}}, a(i, j));
        }
    F.components.push_back(p);
    Eigen::VectorXd x1(2), x2(2), d(2);
    for (int i = 0; i < 2; ++i) {
        x1[i] = rng.uniform01();
        x2[i] = rng.uniform01();
        d[i] = -1.0 + 2.0 * rng.uniform01();
    }
    const double total =
        multilinear_differential(F, 2, MultilinearMode::Total, {x1, x2}, {d});
    const double by_hand = (d.transpose() * a * x2 + x1.transpose() * a * d).value();
    return std::abs(total - by_hand);
}

double fd_consistency_check(const VerifyOptions&, std::string&) {
    CounterRng rng(14);
    // quadratic target: the order-2 nested forward difference is exact up to
    // rounding
    PolyFunctional f;
    f.in_dim = 2;
    Polynomial<double> p(2);
    p.add_term({}, -1.0 + 2.0 * rng.uniform01());
    p.add_term({{0, 1}}, -1.0 + 2.0 * rng.uniform01());
    p.add_term({{1, 1}}, -1.0 + 2.0 * rng.uniform01());
    p.add_term({{0, 2}}, -1.0 + 2.0 * rng.uniform01());
    p.add_term({{0, 1}, {1, 1}}, -1.0 + 2.0 * rng.uniform01());
    p.add_term({{1, 2}}, -1.0 + 2.0 * rng.uniform01());
    f.components.push_back(p);
    Eigen::VectorXd x(2), d1(2), d2(2);
    for (int i = 0; i < 2; ++i) {
        x[i] = rng.uniform01();
        d1[i] = -1.0 + 2.0 * rng.uniform01();
        d2[i] = -1.0 + 2.0 * rng.uniform01();
    }
    const auto exact = analytic_differential(f, x, {d1, d2});
    const auto fd = fd_differential(f, x, {d1, d2}, 1e-4);
    return (exact - fd).cwiseAbs().maxCoeff();
}

double order_cap_check(const VerifyOptions&, std::string&) {
    CounterRng rng(15);
    const auto g = rand_map(rng, 1, 1, 1);
    const auto f = rand_map(rng, 1, 1, 1);
    Eigen::VectorXd x(1);
    x << 0.5;
    DirectionSet dirs(9, Eigen::VectorXd::Ones(1));
    try {
        faa_di_bruno(f, g, x, dirs);
        return 1.0;
    } catch (const DomainError&) {
        return 0.0;
    }
}

double extraction_check(const VerifyOptions&, std::string&) {
    CounterRng rng(21);
    const auto space = DiscreteSpace::with_size(2);
    double err = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = rand_dist(rng, space, 3);
        for (int n = 0; n <= 2; ++n) {
            Tuple q(static_cast<std::size_t>(n), 0);
            do {
                err = std::max(err, std::abs(extract_probability(d, q) - d.probability(q)));
                err = std::max(err, std::abs(extract_janossy(d, q) - janossy(d, q)));
                err = std::max(err, std::abs(extract_moment(d, q) - factorial_moment(d, q)));
            } while (n > 0 && next_tuple(2, q));
        }
    }
    return err;
}

double poisson_janossy_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(2);
    Eigen::ArrayXd lam(2);
    lam << 0.4, 0.25;
    const auto d = make_poisson(space, lam, 8, true);
    const double j0 = janossy(d, {});
    double err = 0.0;
    for (int n = 1; n <= 3; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            double prod = 1.0;
            for (int x : t) prod *= lam[x];
            err = std::max(err, std::abs(janossy(d, t) / j0 - prod));
        } while (next_tuple(2, t));
    }
    return err;
}

double khinchin_pgfl_check(const VerifyOptions&, std::string&) {
    CounterRng rng(22);
    const auto space = DiscreteSpace::with_size(2);
    Eigen::ArrayXd k1(2), k2(4);
    for (int i = 0; i < 2; ++i) k1[i] = 0.02 + 0.04 * rng.uniform01();
    for (int i = 0; i < 4; ++i) k2[i] = 0.005 + 0.01 * rng.uniform01();
    const KhinchinFamily fam{space, {k1, k2}};
    const auto d = make_khinchin(fam, 16, false);
    double err = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::ArrayXd w(2);
        w << rng.uniform01(), rng.uniform01();
        err = std::max(err, std::abs(khinchin_pgfl(fam, w) - expectation_F(d, w)));
    }
    return err;
}

double superposition_check(const VerifyOptions&, std::string&) {
    CounterRng rng(23);
    const auto space = DiscreteSpace::with_size(2);
    const auto a = rand_dist(rng, space, 2);
    const auto b = rand_dist(rng, space, 3);
    Eigen::ArrayXd w(2);
    w << 0.35, 0.8;
    return std::abs(expectation_F(superpose(a, b), w) - expectation_F(a, w) * expectation_F(b, w));
}

double cardinality_intensity_check(const VerifyOptions&, std::string&) {
    CounterRng rng(24);
    const auto space = DiscreteSpace::with_size(3);
    const auto d = rand_dist(rng, space, 3);
    const auto card = cardinality_pmf(d);
    const auto inten = intensity(d);
    double err = std::abs(card.sum() - 1.0);
    double mean = 0.0;
    for (Eigen::Index n = 0; n < card.size(); ++n) mean += static_cast<double>(n) * card[n];
    err = std::max(err, std::abs(inten.sum() - mean));
    for (int x = 0; x < 3; ++x)
        err = std::max(err, std::abs(inten[x] - factorial_moment(d, {x})));
    return err;
}

SingleObjectKernel demo_motion() {
    SingleObjectKernel k;
    k.survival = Eigen::ArrayXd(2);
    k.survival << 0.9, 0.75;
    k.move = Eigen::MatrixXd(2, 2);
    k.move << 0.8, 0.2, 0.3, 0.7;
    return k;
}

double ck_point_prior_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(2);
    const auto kernel = branching_kernel(bernoulli_kernel(space, space, demo_motion()),
                                         SequenceDist::empty_process(space), 3);
    const Tuple t0 = {1, 0};
    std::vector<Eigen::ArrayXd> w(3);
    w[0] = Eigen::ArrayXd::Zero(1);
    w[1] = Eigen::ArrayXd::Zero(2);
    w[2] = Eigen::ArrayXd::Zero(4);
    w[2][static_cast<Eigen::Index>(tuple_index(2, t0))] = 1.0;
    const SequenceDist point(space, std::move(w));
    const auto pushed = chapman_kolmogorov(point, kernel);
    const auto direct = kernel.at(t0);
    double err = 0.0;
    for (int n = 0; n <= 2; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            err = std::max(err, std::abs(janossy(pushed, t) - janossy(direct, t)));
        } while (n > 0 && next_tuple(2, t));
    }
    return err;
}

double branching_thinning_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(1);
    SingleObjectKernel k;
    k.survival = Eigen::ArrayXd::Constant(1, 0.6);
    k.move = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const auto kernel = branching_kernel(bernoulli_kernel(space, space, k),
                                         SequenceDist::empty_process(space), 3);
    const auto card = cardinality_pmf(kernel.at({0, 0, 0}));
    double err = 0.0;
    const double q = 0.6;
    const double expected[] = {(1 - q) * (1 - q) * (1 - q), 3 * q * (1 - q) * (1 - q),
                               3 * q * q * (1 - q), q * q * q};
    for (int n = 0; n <= 3; ++n) err = std::max(err, std::abs(card[n] - expected[n]));
    return err;
}

double galton_watson_check(const VerifyOptions&, std::string&) {
    Eigen::ArrayXd offspring(3);
    offspring << 0.5, 0.0, 0.5;  // pgf (1 + s^2) / 2
    Eigen::ArrayXd initial(2);
    initial << 0.0, 1.0;
    const auto gens = galton_watson(offspring, initial, 2, 8);
    double err = std::abs(gens.at(1)[0] - 0.5);
    err = std::max(err, std::abs(gens.at(2)[0] - 0.625));
    return err;
}

double interaction_consistency_check(const VerifyOptions&, std::string&) {
    const auto pspace = DiscreteSpace::with_size(2);
    const auto dspace = DiscreteSpace::with_size(2);
    const auto zspace = DiscreteSpace::with_size(1);
    std::vector<Eigen::ArrayXd> psi_w(3);
    psi_w[0] = Eigen::ArrayXd::Zero(1);
    psi_w[1] = Eigen::ArrayXd::Constant(1, 0.6);
    psi_w[2] = Eigen::ArrayXd::Constant(1, 0.4);
    Eigen::ArrayXd pp(3);
    pp << 0.3, 0.5, 0.2;
    const InteractionSpec spec{pspace,
                               dspace,
                               SequenceDist(zspace, std::move(psi_w)),
                               pp,
                               Eigen::MatrixXd(),
                               [dspace](const Tuple& block, int) {
                                   int sum = 0;
                                   for (int x : block) sum += x;
                                   std::vector<Eigen::ArrayXd> w(2);
                                   w[0] = Eigen::ArrayXd::Constant(1, 0.3);
                                   w[1] = Eigen::ArrayXd::Zero(2);
                                   w[1][sum % 2] = 0.7;
                                   return SequenceDist(dspace, std::move(w), AllowSubnormal{});
                               }};
    const Tuple parents = {0, 1};
    const auto assembled = interacting_kernel_dist(spec, parents, 3);
    double err = 0.0;
    for (int n = 0; n <= 2; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            const auto [p, m] = interacting_kernel(spec, parents, t);
            err = std::max(err, std::abs(p - assembled.probability(t)));
            err = std::max(err, std::abs(m - factorial_moment(assembled, t)));
        } while (n > 0 && next_tuple(2, t));
    }
    return err;
}

double majority_rule_check(const VerifyOptions&, std::string&) {
    const auto fine = DiscreteSpace::named({"down", "up"});
    const auto coarse = DiscreteSpace::named({"down", "up"});
    RenormSpec spec;
    spec.fine_space = fine;
    spec.coarse_space = coarse;
    spec.group_count_pmf = Eigen::ArrayXd(2);
    spec.group_count_pmf << 0.0, 1.0;  // one block
    spec.block_size_pmf = Eigen::ArrayXd(4);
    spec.block_size_pmf << 0.0, 0.0, 0.0, 1.0;  // of three sites
    spec.block_kernel = [coarse](const Tuple& block) {
        int ups = 0;
        for (int x : block) ups += x == 1;
        Eigen::ArrayXd out = Eigen::ArrayXd::Zero(2);
        out[2 * ups >= static_cast<int>(block.size()) + 1 ? 1 : 0] = 1.0;
        return out;
    };
    // three independent sites at p = 0.6
    const double p = 0.6;
    double up = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        Tuple sites;
        double w = 1.0;
        for (int i = 0; i < 3; ++i) {
            const int s = (mask >> i) & 1;
            sites.push_back(s);
            w *= s == 1 ? p : 1 - p;
        }
        up += w * renormalize(spec, sites).probability({1});
    }
    return std::abs(up - 0.648);
}

double conjugate_predict_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(2);
    ConjugateFamilyState state;
    state.space = space;
    {
        Eigen::ArrayXd m1(2), m2(2);
        m1 << 0.7, 0.3;
        m2 << 0.2, 0.8;
        state.hypotheses.push_back({0.6, {m1}});
        state.hypotheses.push_back({0.4, {m1, m2}});
    }
    ConjugateFamilyState births;
    births.space = space;
    {
        Eigen::ArrayXd b(2);
        b << 0.5, 0.5;
        births.hypotheses.push_back({0.8, {}});
        births.hypotheses.push_back({0.2, {b}});
    }
    const auto motion = demo_motion();
    const auto predicted = predict_independent(
        state, std::vector<SingleObjectKernel>(2, motion), births);
    const auto kernel =
        branching_kernel(bernoulli_kernel(space, space, motion), births.assemble(1), 3);
    const auto oracle = chapman_kolmogorov(state.assemble(), kernel);
    const auto got = predicted.assemble();
    double err = 0.0;
    for (int n = 0; n <= 3; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            err = std::max(err, std::abs(janossy(got, t) - janossy(oracle, t)));
        } while (n > 0 && next_tuple(2, t));
    }
    return err;
}

// shared toy measurement model over two states and two measurement labels
struct ToyMeasurement {
    DiscreteSpace zs = DiscreteSpace::with_size(2);
    Eigen::ArrayXd miss = Eigen::ArrayXd(2);
    Eigen::MatrixXd detect = Eigen::MatrixXd(2, 2);
    Eigen::ArrayXd rate = Eigen::ArrayXd(2);

    ToyMeasurement() {
        miss << 0.25, 0.4;
        detect << 0.55, 0.2, 0.15, 0.45;
        rate << 0.06, 0.04;
    }

    LikelihoodKernel kernel(const DiscreteSpace& states, int m_max) const {
        LikelihoodDef def;
        def.miss = miss;
        def.detect = detect;
        Eigen::ArrayXd r = rate;
        return build_likelihood_kernel(def, states, zs,
                                       make_poisson(zs, r, m_max, true), 2 * m_max);
    }

    JointLikelihood joint() const {
        const Eigen::ArrayXd m = miss;
        const Eigen::MatrixXd d = detect;
        return [m, d](const Tuple& meas, const Tuple& states) -> double {
            if (states.size() != 1 || meas.size() > 1) return 0.0;
            return meas.empty() ? m[states[0]] : d(states[0], meas[0]);
        };
    }
};

double bayes_normalization_check(const VerifyOptions&, std::string&) {
    CounterRng rng(31);
    const auto space = DiscreteSpace::with_size(2);
    const auto prior = rand_dist(rng, space, 3);
    const ToyMeasurement toy;
    const auto post = bayes_update(prior, toy.kernel(space, 4), {0, 1});
    double err = std::abs(post.mass() - 1.0);
    // an uninformative report leaves the prior untouched
    const LikelihoodKernel flat(space, toy.zs, 3, [&](const Tuple&) {
        return SequenceDist::empty_process(toy.zs);
    });
    const auto same = bayes_update(prior, flat, {});
    for (int n = 0; n <= 3; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            err = std::max(err, std::abs(same.probability(t) - prior.probability(t)));
        } while (n > 0 && next_tuple(2, t));
    }
    return err;
}

double phd_cluster_agreement_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(2);
    const ToyMeasurement toy;
    Eigen::ArrayXd lam(2);
    lam << 0.3, 0.2;
    const KhinchinFamily fam{space, {lam}};
    const auto clutter = ClutterModel::poisson(toy.zs, toy.rate);
    double err = 0.0;
    for (const Observation& obs : {Observation{}, Observation{1}, Observation{0, 1}}) {
        const auto closed = phd_update(lam, toy.miss, toy.detect, toy.rate, obs);
        for (int x = 0; x < 2; ++x)
            err = std::max(err, std::abs(closed[x] -
                                         khinchin_update(fam, toy.joint(), clutter, obs, {x})));
    }
    return err;
}

double phd_oracle_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(2);
    const ToyMeasurement toy;
    Eigen::ArrayXd lam(2);
    lam << 0.08, 0.05;
    const auto prior = make_poisson(space, lam, 6, true);
    const auto kernel = toy.kernel(space, 6);
    double err = 0.0;
    for (const Observation& obs : {Observation{}, Observation{0}, Observation{1, 0}}) {
        const auto closed = phd_update(lam, toy.miss, toy.detect, toy.rate, obs);
        for (int x = 0; x < 2; ++x)
            err = std::max(err, std::abs(closed[x] -
                                         posterior_factorial_moment(prior, kernel, obs, {x})));
    }
    return err;
}

double pair_moment_agreement_check(const VerifyOptions&, std::string&) {
    CounterRng rng(32);
    const auto space = DiscreteSpace::with_size(2);
    const ToyMeasurement toy;
    GaussPoissonPrior prior;
    prior.space = space;
    prior.lambda1 = Eigen::ArrayXd(2);
    prior.lambda1 << 0.05, 0.04;
    prior.lambda2 = Eigen::ArrayXd(4);
    for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
            prior.lambda2[a * 2 + b] = 0.008 + 0.01 * rng.uniform01();
            prior.lambda2[b * 2 + a] = prior.lambda2[a * 2 + b];
        }
    PairLikelihood lik;
    lik.miss1 = toy.miss;
    lik.detect1 = toy.detect;
    lik.detect2 = Eigen::MatrixXd(4, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
            const Eigen::RowVectorXd row =
                (0.7 * rand_simplex(rng, 2)).matrix().transpose();
            lik.detect2.row(a * 2 + b) = row;
            lik.detect2.row(b * 2 + a) = row;
        }
    lik.miss2 = 1.0 - lik.detect2.rowwise().sum().array();
    const KhinchinFamily fam{space, {prior.lambda1, prior.lambda2}};
    const auto clutter = ClutterModel::poisson(toy.zs, toy.rate);
    const JointLikelihood jl = [&lik](const Tuple& meas, const Tuple& states) -> double {
        if (meas.size() > 1) return 0.0;
        if (states.size() == 1)
            return meas.empty() ? lik.miss1[states[0]] : lik.detect1(states[0], meas[0]);
        if (states.size() == 2) {
            const int p = states[0] * 2 + states[1];
            return meas.empty() ? lik.miss2[p] : lik.detect2(p, meas[0]);
        }
        return 0.0;
    };
    const Observation obs = {1, 0};
    const auto [m1, m2] = gauss_poisson_update(prior, lik, toy.rate, obs);
    double err = 0.0;
    for (int x = 0; x < 2; ++x)
        err = std::max(err, std::abs(m1[x] - khinchin_update(fam, jl, clutter, obs, {x})));
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            err = std::max(err, std::abs(m2[x1 * 2 + x2] -
                                         khinchin_update(fam, jl, clutter, obs, {x1, x2})));
    return err;
}

double conjugate_update_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(2);
    const ToyMeasurement toy;
    ConjugateFamilyState state;
    state.space = space;
    {
        Eigen::ArrayXd m1(2), m2(2);
        m1 << 0.65, 0.35;
        m2 << 0.1, 0.9;
        state.hypotheses.push_back({0.5, {}});
        state.hypotheses.push_back({0.3, {m1}});
        state.hypotheses.push_back({0.2, {m1, m2}});
    }
    SlotLikelihood slot;
    slot.miss = toy.miss;
    slot.detect = toy.detect;
    const auto clutter = make_poisson(toy.zs, toy.rate, 3, true);
    const Observation obs = {0};
    const auto post = independent_update(state, {slot, slot}, clutter, obs);
    const auto oracle =
        bayes_update(state.assemble(), toy.kernel(space, 3), obs);
    const auto got = post.assemble();
    double err = 0.0;
    for (int n = 0; n <= 2; ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            err = std::max(err, std::abs(janossy(got, t) - janossy(oracle, t)));
        } while (n > 0 && next_tuple(2, t));
    }
    return err;
}

double smoother_check(const VerifyOptions&, std::string&) {
    CounterRng rng(33);
    const auto space = DiscreteSpace::with_size(2);
    const ToyMeasurement toy;
    const auto prior = rand_dist(rng, space, 2);
    const auto kernel = branching_kernel(bernoulli_kernel(space, space, demo_motion()),
                                         SequenceDist::empty_process(space), 2);
    const auto lik = toy.kernel(space, 2);
    const Observation y1 = {0}, y2 = {1};
    const auto f1 = bayes_update(chapman_kolmogorov(prior, kernel), lik, y1);
    const auto f2 = bayes_update(chapman_kolmogorov(f1, kernel), lik, y2);
    const auto smoothed = smooth({f1, f2}, {kernel});

    // joint trajectory enumeration oracle for the first-step marginal
    const auto pred1 = chapman_kolmogorov(prior, kernel);
    double err = 0.0;
    double norm = 0.0;
    std::vector<std::pair<Tuple, double>> marg;
    for (int n1 = 0; n1 <= 2; ++n1) {
        Tuple t1(static_cast<std::size_t>(n1), 0);
        do {
            const double base = pred1.probability(t1) * janossy(lik.at(t1), y1);
            double total = 0.0;
            if (base > 0.0) {
                const auto step = kernel.at(t1);
                for (int n2 = 0; n2 <= 2; ++n2) {
                    Tuple t2(static_cast<std::size_t>(n2), 0);
                    do {
                        total += base * step.probability(t2) * janossy(lik.at(t2), y2);
                    } while (n2 > 0 && next_tuple(2, t2));
                }
            }
            marg.emplace_back(t1, total);
            norm += total;
        } while (n1 > 0 && next_tuple(2, t1));
    }
    for (const auto& [t1, total] : marg)
        err = std::max(err, std::abs(smoothed.at(0).probability(t1) - total / norm));
    return err;
}

double clutter_reading_check(const VerifyOptions&, std::string& note) {
    note =
        "clutter reading: the spurious group in each association is a subset of the "
        "measurements, never of the states; multi-measurement clutter groups draw on the "
        "per-group intensity table (classical independent clutter is the singleton-only case)";
    const auto zs = DiscreteSpace::with_size(2);
    Eigen::ArrayXd rate(2);
    rate << 0.3, 0.5;
    const auto poisson = ClutterModel::poisson(zs, rate);
    double err = std::abs(poisson.block_intensity({0}) - 0.3);
    err = std::max(err, std::abs(poisson.block_intensity({1}) - 0.5));
    err = std::max(err, std::abs(poisson.block_intensity({0, 1})));
    Eigen::ArrayXd pairs(4);
    pairs << 0.1, 0.2, 0.05, 0.15;
    const auto grouped = ClutterModel::clusters(KhinchinFamily{zs, {rate, pairs}});
    err = std::max(err, std::abs(grouped.block_intensity({0, 1}) - (0.2 + 0.05)));
    err = std::max(err, std::abs(grouped.block_intensity({0, 0}) - 2 * 0.1));
    return err;
}

const char* demo_config_text() {
    return R"({
  "space": {"labels": ["a", "b"]},
  "measurement_space": {"labels": ["u", "v"]},
  "processes": {
    "prior": {"kind": "poisson", "lambda": [0.3, 0.2], "n_max": 4, "renormalize": true}
  },
  "kernels": {
    "drift": {
      "kind": "branching",
      "m_max": 8,
      "per_point": {"survival": [0.9, 0.8], "move": [[0.7, 0.3], [0.2, 0.8]]},
      "birth": {"kind": "poisson", "lambda": [0.05, 0.05], "n_max": 2, "renormalize": true}
    }
  },
  "likelihood": {"detect": [[0.6, 0.1], [0.2, 0.5]]},
  "clutter": {"kind": "poisson", "lambda": [0.1, 0.1], "n_max": 3, "renormalize": true},
  "scenario": {
    "prior_ref": "prior",
    "steps": [
      {"kernel_ref": "drift", "observation": ["u"]},
      {"kernel_ref": "drift", "observation": ["v", "u"]}
    ],
    "filter": {"kind": "exact"}
  },
  "seed": 7
})";
}

double sampling_check(const VerifyOptions&, std::string&) {
    const auto space = DiscreteSpace::with_size(1);
    const auto d = make_poisson(space, Eigen::ArrayXd::Constant(1, 1.0), 9, true);
    CounterRng rng(99);
    const int samples = 20000;
    double mean = 0.0;
    for (int i = 0; i < samples; ++i)
        mean += static_cast<double>(sample_dist(d, rng).size());
    mean /= samples;
    return std::abs(mean - 1.0);
}

double csv_determinism_check(const VerifyOptions&, std::string&) {
    const auto cfg = parse_config(demo_config_text());
    double err = 0.0;
    err += run_filter(cfg).csv != run_filter(cfg).csv;
    err += generate_csv(cfg) != generate_csv(cfg);
    return err;
}

double config_round_trip_check(const VerifyOptions&, std::string&) {
    const auto once = serialize_config(parse_config(demo_config_text()));
    const auto twice = serialize_config(parse_config(once));
    double err = once != twice;
    try {
        parse_config(R"({"space": {"labels": ["a"]}, "spurious": 1})");
        err += 1.0;
    } catch (const DomainError&) {
    }
    return err;
}

const std::vector<CheckDef>& registry();

double registry_complete_check(const VerifyOptions&, std::string& note) {
    const auto& checks = registry();
    std::set<std::string> names;
    std::set<std::string> suites;
    double err = 0.0;
    for (const auto& c : checks) {
        if (!names.insert(std::string(c.suite) + "/" + c.name).second) err += 1.0;
        suites.insert(c.suite);
    }
    for (const auto& s : verify_suites()) err += suites.count(s) == 0;
    err += checks.size() < 25;
    note = std::to_string(checks.size()) + " checks across " + std::to_string(suites.size()) +
           " suites";
    return err;
}

const std::vector<CheckDef>& registry() {
    static const std::vector<CheckDef> checks = {
        {"partitions", "bell-count n<=10", 0.0, bell_count_check},
        {"partitions", "restricted-equals-filtered", 0.0, restricted_filter_check},
        {"partitions", "canonical-order-and-format", 0.0, canonical_format_check},
        {"partitions", "constraint-names", 0.0, constraint_name_check},
        {"calculus", "partition-chain-rule-random", 1e-9, faa_di_bruno_check},
        {"calculus", "total-differential-decomposition", 1e-10, total_decomposition_check},
        {"calculus", "multilinear-injection-sum", 1e-10, multilinear_check},
        {"calculus", "finite-difference-consistency", 1e-6, fd_consistency_check},
        {"calculus", "order-cap-guard", 0.0, order_cap_check},
        {"process-core", "extraction-recovery", 1e-10, extraction_check},
        {"process-core", "poisson-janossy-ratio", 1e-12, poisson_janossy_check},
        {"process-core", "cluster-pgfl-agreement", 1e-10, khinchin_pgfl_check},
        {"process-core", "superposition-product", 1e-12, superposition_check},
        {"process-core", "cardinality-intensity-consistency", 1e-12,
         cardinality_intensity_check},
        {"dynamics", "transport-point-prior", 1e-12, ck_point_prior_check},
        {"dynamics", "branching-binomial-thinning", 1e-12, branching_thinning_check},
        {"dynamics", "galton-watson-pins", 1e-12, galton_watson_check},
        {"dynamics", "interaction-assembled-law", 1e-12, interaction_consistency_check},
        {"dynamics", "majority-rule-0.648", 1e-12, majority_rule_check},
        {"dynamics", "conjugate-predict-closure", 1e-12, conjugate_predict_check},
        {"inference", "bayes-posterior-normalization", 1e-12, bayes_normalization_check},
        {"inference", "independent-point-equals-cluster-update", 1e-12,
         phd_cluster_agreement_check},
        {"inference", "independent-point-exhaustive-oracle", 1e-9, phd_oracle_check},
        {"inference", "pair-moment-equals-cluster-update", 1e-12, pair_moment_agreement_check},
        {"inference", "conjugate-update-oracle", 1e-12, conjugate_update_check},
        {"inference", "smoother-two-step-oracle", 1e-10, smoother_check},
        {"inference", "clutter-block-reading", 0.0, clutter_reading_check},
        {"harness", "inverse-cdf-sampling", 0.0213, sampling_check},
        {"harness", "csv-byte-determinism", 0.0, csv_determinism_check},
        {"harness", "config-round-trip", 0.0, config_round_trip_check},
        {"harness", "registry-complete", 0.0, registry_complete_check},
    };
    return checks;
}

}  // namespace

std::vector<std::string> verify_suites() {
    return {"partitions", "calculus", "process-core", "dynamics", "inference", "harness"};
}

RunReport run_verify(const std::string& suite, const VerifyOptions& opts) {
    const auto suites = verify_suites();
    if (suite != "all" &&
        std::none_of(suites.begin(), suites.end(), [&](const auto& s) { return s == suite; }))
        throw DomainError("unknown verify suite '" + suite + "'");
    RunReport report;
    report.rng_algorithm = CounterRng::kAlgorithm;
    report.fingerprint = environment_fingerprint();
    for (const auto& def : registry()) {
        if (suite != "all" && suite != def.suite) continue;
        CheckResult res;
        res.suite = def.suite;
        res.name = def.name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            res.max_error = def.body(opts, res.note);
            res.pass = res.max_error <= def.tolerance;
        } catch (const std::exception& e) {
            res.pass = false;
            res.max_error = std::numeric_limits<double>::infinity();
            res.note = e.what();
        }
        res.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.checks.push_back(std::move(res));
    }
    return report;
}

}  // namespace popcalc
