#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "popcalc/config.hpp"
#include "popcalc/errors.hpp"
#include "popcalc/harness.hpp"
#include "popcalc/inference.hpp"
#include "popcalc/verify.hpp"
#include "test_util.hpp"

using namespace popcalc;

namespace {

const char* kBaseConfig = R"({
  "space": {"labels": ["a", "b"]},
  "measurement_space": {"labels": ["u", "v"]},
  "processes": {
    "prior": {"kind": "poisson", "lambda": [0.18, 0.12], "n_max": 9, "renormalize": true}
  },
  "kernels": {
    "drift": {
      "kind": "branching",
      "m_max": 9,
      "per_point": {"survival": [0.85, 0.9], "move": [[0.75, 0.25], [0.2, 0.8]]}
    }
  },
  "likelihood": {"detect": [[0.55, 0.15], [0.1, 0.6]]},
  "clutter": {"kind": "poisson", "lambda": [0.08, 0.05], "n_max": 3, "renormalize": true},
  "scenario": {
    "prior_ref": "prior",
    "steps": [
      {"kernel_ref": "drift", "observation": []},
      {"kernel_ref": "drift", "observation": ["u", "v"]}
    ],
    "filter": {"kind": "exact"}
  },
  "seed": 11
})";

struct CsvRow {
    int step = 0;
    std::string kind;
    std::string tuple;
    double value = 0.0;
};

std::vector<CsvRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "step,kind,tuple,value");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        CsvRow r;
        const auto c1 = line.find(',');
        const auto q1 = line.find('"', c1);
        const auto q2 = line.find('"', q1 + 1);
        REQUIRE(q2 != std::string::npos);
        r.step = std::stoi(line.substr(0, c1));
        r.kind = line.substr(c1 + 1, q1 - c1 - 2);
        r.tuple = line.substr(q1 + 1, q2 - q1 - 1);
        r.value = std::stod(line.substr(q2 + 2));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::map<std::string, double> slice(const std::vector<CsvRow>& rows, int step,
                                    const std::string& kind) {
    std::map<std::string, double> out;
    for (const auto& r : rows)
        if (r.step == step && r.kind == kind) out.emplace(r.tuple, r.value);
    return out;
}

ScenarioConfig with_filter(const std::string& base, const std::string& kind) {
    auto cfg = parse_config(base);
    REQUIRE(cfg.scenario);
    cfg.scenario->filter.kind = kind;
    return cfg;
}

}  // namespace

TEST_CASE("config: the full document parses and re-serializes byte-stably") {
    const auto cfg = parse_config(kBaseConfig);
    CHECK(cfg.space.labels == std::vector<std::string>{"a", "b"});
    REQUIRE(cfg.measurement_space);
    CHECK(cfg.measurement_space->labels == std::vector<std::string>{"u", "v"});
    CHECK(cfg.processes.at("prior").kind == "poisson");
    CHECK(cfg.kernels.at("drift").m_max == 9);
    REQUIRE(cfg.likelihood);
    // miss defaults to the detection deficit
    CHECK(cfg.likelihood->miss[0] == doctest::Approx(0.3).epsilon(1e-15));
    REQUIRE(cfg.seed);
    CHECK(*cfg.seed == 11);
    REQUIRE(cfg.scenario);
    CHECK(cfg.scenario->steps.size() == 2);
    CHECK(cfg.scenario->steps[0].observation->empty());

    const auto once = serialize_config(cfg);
    const auto twice = serialize_config(parse_config(once));
    CHECK(once == twice);
}

TEST_CASE("config: documents merge by top-level key and collisions are rejected") {
    const std::string base = R"({"space": {"labels": ["a"]}, "seed": 3})";
    const std::string extra = R"({"processes": {
        "p": {"kind": "poisson", "lambda": [0.1], "n_max": 2, "renormalize": true}}})";
    const auto cfg = parse_config_documents({base, extra});
    CHECK(cfg.processes.count("p") == 1);
    CHECK(*cfg.seed == 3);
    CHECK_THROWS_AS(parse_config_documents({base, base}), DomainError);
}

TEST_CASE("config: unknown or malformed keys fail loudly") {
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"]}, "spurious": 1})"), DomainError);
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"], "size": 2}})"), DomainError);
    // kind-specific keys leak across kinds
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"]}, "processes": {
        "p": {"kind": "independent", "lambda": [0.1]}}})"),
                    DomainError);
    // p_p is determined by the coarse-graining form, not configurable
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"]}, "kernels": {
        "k": {"kind": "renormalize", "m_max": 2, "coarse_space": {"labels": ["c"]},
              "interaction": {"psi": [0, 1], "p_t": [0, 1], "p_p": [1],
                              "block_kernel": []}}}})"),
                    DomainError);
    // independent-family knobs on other filters
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"]},
        "processes": {"p": {"kind": "poisson", "lambda": [0.1], "n_max": 2,
                            "renormalize": true}},
        "kernels": {"k": {"kind": "branching", "m_max": 2,
                          "per_point": {"survival": [1.0], "move": [[1.0]]}}},
        "scenario": {"prior_ref": "p", "steps": [{"kernel_ref": "k"}],
                     "filter": {"kind": "exact", "max_hypotheses": 10}}})"),
                    DomainError);
    // dangling references
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"]},
        "processes": {"p": {"kind": "poisson", "lambda": [0.1], "n_max": 2,
                            "renormalize": true}},
        "kernels": {},
        "scenario": {"prior_ref": "p", "steps": [{"kernel_ref": "gone"}],
                     "filter": {"kind": "exact"}}})"),
                    DomainError);
    // seeds are unsigned
    CHECK_THROWS_AS(parse_config(R"({"space": {"labels": ["a"]}, "seed": -4})"), DomainError);
}

TEST_CASE("config: built processes match the direct constructors") {
    const auto space = DiscreteSpace::named({"a", "b"});

    SUBCASE("poisson") {
        const auto cfg = parse_config(R"({"space": {"labels": ["a", "b"]}, "processes": {
            "p": {"kind": "poisson", "lambda": [0.4, 0.3], "n_max": 5, "renormalize": true}}})");
        const auto built = build_process(cfg.processes.at("p"), space);
        Eigen::ArrayXd lam(2);
        lam << 0.4, 0.3;
        const auto direct = make_poisson(space, lam, 5, true);
        for (int n = 0; n <= 5; ++n) CHECK(built.weights(n).isApprox(direct.weights(n), 1e-15));
    }

    SUBCASE("khinchin") {
        const auto cfg = parse_config(R"({"space": {"labels": ["a", "b"]}, "processes": {
            "p": {"kind": "khinchin", "clusters": [[0.2, 0.1], [0.03, 0.01, 0.02, 0.04]],
                  "n_max": 6, "renormalize": true}}})");
        const auto built = build_process(cfg.processes.at("p"), space);
        Eigen::ArrayXd k1(2), k2(4);
        k1 << 0.2, 0.1;
        k2 << 0.03, 0.01, 0.02, 0.04;
        const auto direct = make_khinchin(KhinchinFamily{space, {k1, k2}}, 6, true);
        for (int n = 0; n <= 6; ++n) CHECK(built.weights(n).isApprox(direct.weights(n), 1e-15));
    }

    SUBCASE("independent, also as a one-hypothesis-per-cardinality family") {
        const char* text = R"({"space": {"labels": ["a", "b"]}, "processes": {
            "p": {"kind": "independent", "card_pmf": [0.5, 0.3, 0.2],
                  "marginals": [[], [[0.6, 0.4]], [[0.6, 0.4], [0.1, 0.9]]]}}})";
        const auto cfg = parse_config(text);
        const auto built = build_process(cfg.processes.at("p"), space);
        Eigen::ArrayXd card(3);
        card << 0.5, 0.3, 0.2;
        Eigen::ArrayXd m1(2), m2(2);
        m1 << 0.6, 0.4;
        m2 << 0.1, 0.9;
        const auto direct = make_independent(space, card, {{}, {m1}, {m1, m2}});
        for (int n = 0; n <= 2; ++n) CHECK(built.weights(n).isApprox(direct.weights(n), 1e-15));
        const auto fam = build_family(cfg.processes.at("p"), space);
        const auto assembled = fam.assemble(2);
        for (int n = 0; n <= 2; ++n)
            CHECK(assembled.weights(n).isApprox(direct.weights(n), 1e-15));
    }

    SUBCASE("multi_bernoulli") {
        const auto cfg = parse_config(R"({"space": {"labels": ["a", "b"]}, "processes": {
            "p": {"kind": "multi_bernoulli", "components": [
                {"exist": 0.7, "location": [0.8, 0.2]},
                {"exist": 0.4, "location": [0.25, 0.75]}]}}})");
        const auto built = build_process(cfg.processes.at("p"), space);
        const std::vector<BernoulliComponent> comps = {{0.7, (Eigen::ArrayXd(2) << 0.8, 0.2).finished()},
                                                       {0.4, (Eigen::ArrayXd(2) << 0.25, 0.75).finished()}};
        const auto direct = make_multi_bernoulli(space, comps);
        for (int n = 0; n <= 2; ++n) CHECK(built.weights(n).isApprox(direct.weights(n), 1e-15));
        const auto fam = build_family(cfg.processes.at("p"), space);
        const auto assembled = fam.assemble(2);
        for (int n = 0; n <= 2; ++n)
            CHECK(assembled.weights(n).isApprox(direct.weights(n), 1e-15));
    }

    SUBCASE("explicit tuples, duplicates rejected") {
        const auto cfg = parse_config(R"({"space": {"labels": ["a", "b"]}, "processes": {
            "p": {"kind": "explicit", "tuples": [[], ["b"], ["a", "b"]],
                  "weights": [0.5, 0.3, 0.2]}}})");
        const auto built = build_process(cfg.processes.at("p"), space);
        CHECK(built.probability({}) == 0.5);
        CHECK(built.probability({1}) == 0.3);
        CHECK(built.probability({0, 1}) == 0.2);
        CHECK(built.probability({1, 0}) == 0.0);
        const auto dup = parse_config(R"({"space": {"labels": ["a", "b"]}, "processes": {
            "p": {"kind": "explicit", "tuples": [["b"], ["b"]], "weights": [0.5, 0.5]}}})");
        CHECK_THROWS_AS(build_process(dup.processes.at("p"), space), DomainError);
    }
}

TEST_CASE("config: built kernels match the direct constructions") {
    const auto space = DiscreteSpace::named({"a", "b"});

    SUBCASE("branching") {
        const auto cfg = parse_config(kBaseConfig);
        const auto built = build_kernel(cfg.kernels.at("drift"), space);
        SingleObjectKernel per;
        per.survival = (Eigen::ArrayXd(2) << 0.85, 0.9).finished();
        per.move = (Eigen::MatrixXd(2, 2) << 0.75, 0.25, 0.2, 0.8).finished();
        const auto direct = branching_kernel(bernoulli_kernel(space, space, per),
                                             SequenceDist::empty_process(space), 9);
        for (const Tuple& parents : {Tuple{}, Tuple{1}, Tuple{0, 1}, Tuple{1, 1, 0}}) {
            const auto a = built.at(parents);
            const auto b = direct.at(parents);
            for (int n = 0; n <= std::min(a.n_max(), b.n_max()); ++n)
                CHECK(a.weights(n).isApprox(b.weights(n), 1e-14));
        }
    }

    SUBCASE("explicit table, missing parents named in the error") {
        const auto cfg = parse_config(R"({"space": {"labels": ["a", "b"]}, "kernels": {
            "k": {"kind": "explicit", "m_max": 1, "entries": [
                {"parents": [], "process": {"kind": "explicit", "tuples": [[]],
                                            "weights": [1.0]}},
                {"parents": ["a"], "process": {"kind": "explicit",
                                               "tuples": [["a"], ["b"]],
                                               "weights": [0.9, 0.1]}}]}}})");
        const auto built = build_kernel(cfg.kernels.at("k"), space);
        CHECK(built.at({0}).probability({0}) == doctest::Approx(0.9));
        try {
            built.at({1});
            FAIL("missing parent tuple should be rejected");
        } catch (const DomainError& e) {
            CHECK(std::string(e.what()).find("(b)") != std::string::npos);
        }
    }

    SUBCASE("renormalize agrees with the direct coarse-graining") {
        const auto cfg = parse_config(R"({"space": {"labels": ["a", "b"]}, "kernels": {
            "k": {"kind": "renormalize", "m_max": 3, "coarse_space": {"labels": ["c", "d"]},
                  "interaction": {
                    "psi": [0.0, 1.0],
                    "p_t": [0.0, 0.2, 0.3, 0.5],
                    "block_kernel": [
                      {"block": ["a"], "dist": [0.9, 0.1]},
                      {"block": ["b"], "dist": [0.2, 0.8]},
                      {"block": ["a", "b"], "dist": [0.5, 0.5]},
                      {"block": ["a", "a", "b"], "dist": [0.3, 0.7]}]}}}})");
        const auto built = build_kernel(cfg.kernels.at("k"), space);
        const auto d = built.at({0, 0, 1});
        RenormSpec spec;
        spec.fine_space = space;
        spec.coarse_space = DiscreteSpace::named({"c", "d"});
        spec.group_count_pmf = (Eigen::ArrayXd(2) << 0.0, 1.0).finished();
        spec.block_size_pmf = (Eigen::ArrayXd(4) << 0.0, 0.2, 0.3, 0.5).finished();
        spec.block_kernel = [](const Tuple& block) {
            Eigen::ArrayXd out(2);
            if (block == Tuple{0})
                out << 0.9, 0.1;
            else if (block == Tuple{1})
                out << 0.2, 0.8;
            else if (block == Tuple{0, 1})
                out << 0.5, 0.5;
            else if (block == Tuple{0, 0, 1})
                out << 0.3, 0.7;
            else
                out.setZero();
            return out;
        };
        const auto direct = renormalize(spec, {0, 0, 1});
        for (int n = 0; n <= direct.n_max(); ++n)
            CHECK(d.weights(n).isApprox(direct.weights(n), 1e-14));
    }
}

TEST_CASE("config: conjugate family JSON round trip is bit-exact") {
    ConjugateFamilyState s;
    s.space = DiscreteSpace::named({"a", "b", "c"});
    Eigen::ArrayXd m1(3), m2(3);
    m1 << 1.0 / 3.0, 1.0 / 7.0, 1.0 - 1.0 / 3.0 - 1.0 / 7.0;
    m2 << 0.1, 0.2, 0.7;
    s.hypotheses.push_back({0.125, {}});
    s.hypotheses.push_back({1.0 / 3.0, {m1}});
    s.hypotheses.push_back({0.5413, {m1, m2}});
    const auto back = family_from_json(family_to_json(s));
    REQUIRE(back.hypotheses.size() == 3);
    CHECK(back.space.labels == s.space.labels);
    for (std::size_t h = 0; h < 3; ++h) {
        CHECK(back.hypotheses[h].weight == s.hypotheses[h].weight);
        REQUIRE(back.hypotheses[h].slots.size() == s.hypotheses[h].slots.size());
        for (std::size_t j = 0; j < s.hypotheses[h].slots.size(); ++j)
            CHECK((back.hypotheses[h].slots[j] == s.hypotheses[h].slots[j]).all());
    }
    CHECK(family_to_json(back) == family_to_json(s));
}

TEST_CASE("sampling: inverse-CDF draws reproduce the Poisson mean") {
    const auto space = DiscreteSpace::with_size(1);
    const auto d = make_poisson(space, Eigen::ArrayXd::Constant(1, 1.0), 10, true);
    CounterRng rng(2024);
    const int samples = 100000;
    double mean = 0.0;
    for (int i = 0; i < samples; ++i)
        mean += static_cast<double>(sample_dist(d, rng).size());
    mean /= samples;
    CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(1.0 / samples));
}

TEST_CASE("generate: surely-empty prior yields empty truth rows") {
    auto cfg = parse_config(kBaseConfig);
    ProcessDef empty;
    empty.kind = "explicit";
    empty.tuples = {{}};
    empty.tuple_weights = {1.0};
    cfg.processes["prior"] = empty;
    // no survivors, no births
    cfg.kernels["drift"].per_point.survival.setZero();
    const auto steps = generate(cfg);
    REQUIRE(steps.size() == 2);
    for (const auto& s : steps) CHECK(s.truth.empty());
}

TEST_CASE("generate: byte-identical across runs, seed mandatory") {
    const auto cfg = parse_config(kBaseConfig);
    const auto a = generate_csv(cfg);
    const auto b = generate_csv(cfg);
    CHECK(a == b);
    CHECK(a.substr(0, 21) == "step,kind,tuple,value");
    CHECK(a.find("truth") != std::string::npos);
    CHECK(a.find("obs") != std::string::npos);

    auto unseeded = cfg;
    unseeded.seed.reset();
    CHECK_THROWS_AS(generate(unseeded), DomainError);
}

TEST_CASE("filter: zero steps emit the header only") {
    auto cfg = parse_config(kBaseConfig);
    cfg.scenario->steps.clear();
    const auto run = run_filter(cfg);
    CHECK(run.csv == "step,kind,tuple,value\n");
    CHECK(run.report.step_seconds.empty());
}

TEST_CASE("filter: exact run matches the hand-assembled pipeline") {
    const auto cfg = parse_config(kBaseConfig);
    const auto run = run_filter(cfg);
    CHECK(run.csv == run_filter(cfg).csv);  // determinism
    const auto rows = parse_csv(run.csv);

    // the same pipeline assembled by hand from the library pieces
    const auto kernel = build_kernel(cfg.kernels.at("drift"), cfg.space);
    const auto clutter = build_process(*cfg.clutter, *cfg.measurement_space);
    const auto lik_kernel = build_likelihood_kernel(*cfg.likelihood, cfg.space,
                                                    *cfg.measurement_space, clutter,
                                                    clutter.n_max() + 9);
    auto cur = build_process(cfg.processes.at("prior"), cfg.space);
    const std::vector<Observation> obs = {{}, {0, 1}};
    for (int step = 1; step <= 2; ++step) {
        cur = bayes_update(chapman_kolmogorov(cur, kernel), lik_kernel, obs[step - 1]);
        const auto p = slice(rows, step, "P");
        const auto j = slice(rows, step, "J");
        const auto m1 = slice(rows, step, "M1");
        const auto card = slice(rows, step, "card");
        REQUIRE(p.size() == (1u << 10) - 1);
        for (int n = 0; n <= cur.n_max(); ++n) {
            Tuple t(static_cast<std::size_t>(n), 0);
            do {
                const auto key = tuple_to_string(cfg.space, t);
                CHECK(p.at(key) == doctest::Approx(cur.probability(t)).epsilon(1e-12));
                CHECK(j.at(key) == doctest::Approx(janossy(cur, t)).epsilon(1e-12));
            } while (n > 0 && next_tuple(2, t));
        }
        for (int x = 0; x < 2; ++x)
            CHECK(m1.at(tuple_to_string(cfg.space, {x})) ==
                  doctest::Approx(factorial_moment(cur, {x})).epsilon(1e-12));
        const auto pmf = cardinality_pmf(cur);
        for (Eigen::Index n = 0; n < pmf.size(); ++n)
            CHECK(card.at(std::to_string(n)) == doctest::Approx(pmf[n]).epsilon(1e-12));
    }
}

TEST_CASE("filter: first-moment filter tracks the exact filter on a thinned chain") {
    // no births and a poisson prior keep the exact posterior in the family the
    // closed-form moment update assumes, so M1 agrees to truncation error
    const auto exact = run_filter(with_filter(kBaseConfig, "exact"));
    const auto phd = run_filter(with_filter(kBaseConfig, "phd"));
    const auto er = parse_csv(exact.csv);
    const auto pr = parse_csv(phd.csv);
    for (int step = 1; step <= 2; ++step) {
        const auto em = slice(er, step, "M1");
        const auto pm = slice(pr, step, "M1");
        REQUIRE(pm.size() == 2);
        for (const auto& [tuple, value] : pm)
            CHECK(value == doctest::Approx(em.at(tuple)).epsilon(1e-9));
    }
    // the moment-only filter emits nothing but M1 rows
    for (const auto& r : pr) CHECK(r.kind == "M1");
}

TEST_CASE("filter: conjugate filter assembles to the exact posterior") {
    const char* text = R"({
      "space": {"labels": ["a", "b"]},
      "measurement_space": {"labels": ["u", "v"]},
      "processes": {
        "prior": {"kind": "multi_bernoulli", "components": [
          {"exist": 0.6, "location": [0.7, 0.3]},
          {"exist": 0.35, "location": [0.2, 0.8]}]},
        "hatchery": {"kind": "multi_bernoulli", "components": [
          {"exist": 0.25, "location": [0.5, 0.5]}]}
      },
      "kernels": {
        "drift": {
          "kind": "branching",
          "m_max": 6,
          "per_point": {"survival": [0.9, 0.85], "move": [[0.8, 0.2], [0.3, 0.7]]},
          "birth": {"kind": "multi_bernoulli", "components": [
            {"exist": 0.25, "location": [0.5, 0.5]}]}
        }
      },
      "likelihood": {"detect": [[0.6, 0.1], [0.15, 0.55]]},
      "clutter": {"kind": "poisson", "lambda": [0.07, 0.06], "n_max": 3, "renormalize": true},
      "scenario": {
        "prior_ref": "prior",
        "steps": [
          {"kernel_ref": "drift", "observation": ["v"]},
          {"kernel_ref": "drift", "observation": ["u", "u"]}
        ],
        "filter": {"kind": "independent"}
      }
    })";
    const auto conj = run_filter(parse_config(text));
    const auto exact = run_filter(with_filter(text, "exact"));
    const auto cr = parse_csv(conj.csv);
    const auto er = parse_csv(exact.csv);
    for (int step = 1; step <= 2; ++step) {
        const auto cp = slice(cr, step, "P");
        const auto ep = slice(er, step, "P");
        for (const auto& [tuple, value] : cp) {
            const auto it = ep.find(tuple);
            const double want = it == ep.end() ? 0.0 : it->second;
            CHECK(value == doctest::Approx(want).epsilon(1e-10).scale(1.0));
        }
        const auto cm = slice(cr, step, "M1");
        const auto em = slice(er, step, "M1");
        for (const auto& [tuple, value] : cm)
            CHECK(value == doctest::Approx(em.at(tuple)).epsilon(1e-10));
    }
}

TEST_CASE("filter: pair-moment filter reproduces the closed-form moments") {
    const char* text = R"({
      "space": {"labels": ["a", "b"]},
      "measurement_space": {"labels": ["u", "v"]},
      "processes": {
        "prior": {"kind": "khinchin",
                  "clusters": [[0.06, 0.05], [0.012, 0.008, 0.008, 0.014]],
                  "n_max": 6, "renormalize": true}
      },
      "kernels": {
        "drift": {
          "kind": "branching",
          "m_max": 6,
          "per_point": {"survival": [0.9, 0.85], "move": [[0.8, 0.2], [0.3, 0.7]]},
          "birth": {"kind": "poisson", "lambda": [0.02, 0.015], "n_max": 3,
                    "renormalize": true}
        }
      },
      "likelihood": {
        "miss": [0.3, 0.35],
        "detect": [[0.55, 0.15], [0.1, 0.55]],
        "pair_miss": [0.4, 0.3, 0.3, 0.45],
        "pair_detect": [[0.35, 0.25], [0.4, 0.3], [0.4, 0.3], [0.2, 0.35]]
      },
      "clutter": {"kind": "poisson", "lambda": [0.05, 0.04], "n_max": 3,
                  "renormalize": true},
      "scenario": {
        "prior_ref": "prior",
        "steps": [{"kernel_ref": "drift", "observation": ["v", "u"]}],
        "filter": {"kind": "gauss_poisson"}
      }
    })";
    const auto cfg = parse_config(text);
    const auto run = run_filter(cfg);
    const auto rows = parse_csv(run.csv);
    const auto m1 = slice(rows, 1, "M1");
    const auto m2 = slice(rows, 1, "M2");
    REQUIRE(m1.size() == 2);
    REQUIRE(m2.size() == 4);

    // prediction by hand, then the closed-form update
    const auto& kd = cfg.kernels.at("drift");
    GaussPoissonPrior prior;
    prior.space = cfg.space;
    prior.lambda1 = (kd.per_point.move.transpose() *
                     (cfg.processes.at("prior").clusters[0] * kd.per_point.survival).matrix())
                        .array() +
                    intensity(build_process(*kd.birth, cfg.space));
    prior.lambda2 = Eigen::ArrayXd::Zero(4);
    const auto& l2 = cfg.processes.at("prior").clusters[1];
    for (int y1 = 0; y1 < 2; ++y1)
        for (int y2 = 0; y2 < 2; ++y2)
            for (int x1 = 0; x1 < 2; ++x1)
                for (int x2 = 0; x2 < 2; ++x2)
                    prior.lambda2[y1 * 2 + y2] +=
                        l2[x1 * 2 + x2] * kd.per_point.survival[x1] * kd.per_point.survival[x2] *
                        kd.per_point.move(x1, y1) * kd.per_point.move(x2, y2);
    PairLikelihood pl;
    pl.miss1 = cfg.likelihood->miss;
    pl.detect1 = cfg.likelihood->detect;
    pl.miss2 = cfg.likelihood->pair_miss;
    pl.detect2 = cfg.likelihood->pair_detect;
    const auto [w1, w2] =
        gauss_poisson_update(prior, pl, Eigen::ArrayXd(cfg.clutter->clusters[0]), {1, 0});
    for (int x = 0; x < 2; ++x)
        CHECK(m1.at(tuple_to_string(cfg.space, {x})) == doctest::Approx(w1[x]).epsilon(1e-12));
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            CHECK(m2.at(tuple_to_string(cfg.space, {x1, x2})) ==
                  doctest::Approx(w2[x1 * 2 + x2]).epsilon(1e-12));

    // the moment family is not closed under the update, so multi-step runs are refused
    auto two = parse_config(text);
    two.scenario->steps.push_back(two.scenario->steps[0]);
    CHECK_THROWS_AS(run_filter(two), DomainError);
}

TEST_CASE("smoother: harness run equals the library smoothing pass") {
    const auto cfg = parse_config(kBaseConfig);
    const auto run = run_smoother(cfg);
    const auto rows = parse_csv(run.csv);

    const auto kernel = build_kernel(cfg.kernels.at("drift"), cfg.space);
    const auto clutter = build_process(*cfg.clutter, *cfg.measurement_space);
    const auto lik_kernel = build_likelihood_kernel(*cfg.likelihood, cfg.space,
                                                    *cfg.measurement_space, clutter,
                                                    clutter.n_max() + 9);
    auto cur = build_process(cfg.processes.at("prior"), cfg.space);
    std::vector<SequenceDist> filtered;
    const std::vector<Observation> obs = {{}, {0, 1}};
    for (const auto& o : obs)
        filtered.push_back(bayes_update(chapman_kolmogorov(filtered.empty() ? cur : filtered.back(),
                                                           kernel),
                                        lik_kernel, o));
    const auto smoothed = smooth(filtered, {kernel});
    for (int step = 1; step <= 2; ++step) {
        const auto p = slice(rows, step, "P");
        const auto& want = smoothed[static_cast<std::size_t>(step - 1)];
        for (int n = 0; n <= want.n_max(); ++n) {
            Tuple t(static_cast<std::size_t>(n), 0);
            do {
                CHECK(p.at(tuple_to_string(cfg.space, t)) ==
                      doctest::Approx(want.probability(t)).epsilon(1e-12));
            } while (n > 0 && next_tuple(2, t));
        }
    }
    // backward pass timing rides behind the per-step entries
    CHECK(run.report.step_seconds.size() == 3);
}

TEST_CASE("verify: registry runs green and the failure injection trips") {
    const auto report = run_verify("all");
    CHECK(report.checks.size() >= 25);
    CHECK(report.all_pass());
    CHECK(report.rng_algorithm == CounterRng::kAlgorithm);

    const auto partitions = run_verify("partitions");
    bool found = false;
    for (const auto& c : partitions.checks) {
        CHECK(c.suite == "partitions");
        if (c.name == "bell-count n<=10") found = c.pass;
    }
    CHECK(found);

    const auto hurt = run_verify("partitions", {true});
    CHECK(!hurt.all_pass());
    for (const auto& c : hurt.checks)
        if (c.name == "bell-count n<=10") CHECK(!c.pass);

    CHECK_THROWS_AS(run_verify("no-such-suite"), DomainError);

    // the text report names every check once
    const auto text = report.to_text();
    CHECK(text.find("summary: ") != std::string::npos);
    for (const auto& c : report.checks)
        CHECK(text.find(std::string(c.suite) + "/" + c.name) != std::string::npos);
}
