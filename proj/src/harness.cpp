#include "popcalc/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "popcalc/errors.hpp"

namespace popcalc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ScenarioDef& need_scenario(const ScenarioConfig& cfg) {
    if (!cfg.scenario) throw DomainError("config has no scenario");
    return *cfg.scenario;
}

const DiscreteSpace& need_measurement_space(const ScenarioConfig& cfg) {
    if (!cfg.measurement_space) throw DomainError("scenario needs a measurement_space");
    return *cfg.measurement_space;
}

const LikelihoodDef& need_likelihood(const ScenarioConfig& cfg) {
    if (!cfg.likelihood) throw DomainError("scenario needs a likelihood");
    return *cfg.likelihood;
}

SequenceDist build_clutter(const ScenarioConfig& cfg, const DiscreteSpace& meas) {
    if (cfg.clutter) return build_process(*cfg.clutter, meas);
    return SequenceDist::empty_process(meas);
}

// clutter rate vector for the moment-based filters
Eigen::ArrayXd clutter_rate(const ScenarioConfig& cfg, const DiscreteSpace& meas,
                            const std::string& filter_kind) {
    if (!cfg.clutter) return Eigen::ArrayXd::Zero(meas.size());
    if (cfg.clutter->kind != "poisson")
        throw DomainError("the " + filter_kind + " filter needs poisson clutter");
    return cfg.clutter->clusters.at(0);
}

std::map<std::string, TransitionKernel> build_step_kernels(const ScenarioConfig& cfg) {
    std::map<std::string, TransitionKernel> out;
    for (const auto& step : need_scenario(cfg).steps)
        if (!out.count(step.kernel_ref))
            out.emplace(step.kernel_ref, build_kernel(cfg.kernels.at(step.kernel_ref), cfg.space));
    return out;
}

Observation step_observation(const ScenarioStep& step, const DiscreteSpace& meas, int index) {
    if (!step.observation)
        throw DomainError("step " + std::to_string(index) +
                          " has no observation; generate one first");
    return tuple_from_labels(meas, *step.observation);
}

const KernelDef& branching_def(const ScenarioConfig& cfg, const std::string& ref,
                               const std::string& filter_kind) {
    const auto& def = cfg.kernels.at(ref);
    if (def.kind != "branching")
        throw DomainError("the " + filter_kind + " filter needs survival-and-move kernels, but '" +
                          ref + "' has kind '" + def.kind + "'");
    return def;
}

void append_row(std::string& csv, int step, const char* kind, const std::string& tuple,
                double value) {
    csv += std::to_string(step);
    csv += ',';
    csv += kind;
    csv += ",\"";
    csv += tuple;
    csv += "\",";
    csv += csv_number(value);
    csv += '\n';
}

// P and J over every tuple, M1 per point, M2 per ordered pair, card per count
void emit_distribution(std::string& csv, int step, const SequenceDist& d) {
    const int s = d.space().size();
    for (const char* kind : {"P", "J"}) {
        for (int n = 0; n <= d.n_max(); ++n) {
            Tuple t(static_cast<std::size_t>(n), 0);
            do {
                const double v = kind[0] == 'P' ? d.probability(t) : janossy(d, t);
                append_row(csv, step, kind, tuple_to_string(d.space(), t), v);
            } while (n > 0 && next_tuple(s, t));
        }
    }
    for (int x = 0; x < s; ++x)
        append_row(csv, step, "M1", tuple_to_string(d.space(), {x}),
                   factorial_moment(d, {x}));
    for (int x1 = 0; x1 < s; ++x1)
        for (int x2 = 0; x2 < s; ++x2)
            append_row(csv, step, "M2", tuple_to_string(d.space(), {x1, x2}),
                       factorial_moment(d, {x1, x2}));
    const Eigen::ArrayXd card = cardinality_pmf(d);
    for (Eigen::Index n = 0; n < card.size(); ++n)
        append_row(csv, step, "card", std::to_string(n), card[n]);
}

void emit_moments(std::string& csv, int step, const DiscreteSpace& space,
                  const Eigen::ArrayXd& m1, const Eigen::ArrayXd* m2) {
    for (int x = 0; x < space.size(); ++x)
        append_row(csv, step, "M1", tuple_to_string(space, {x}), m1[x]);
    if (m2)
        for (int x1 = 0; x1 < space.size(); ++x1)
            for (int x2 = 0; x2 < space.size(); ++x2)
                append_row(csv, step, "M2", tuple_to_string(space, {x1, x2}),
                           (*m2)[x1 * space.size() + x2]);
}

constexpr const char* kCsvHeader = "step,kind,tuple,value\n";

RunReport base_report(const ScenarioConfig& cfg) {
    RunReport r;
    r.rng_algorithm = CounterRng::kAlgorithm;
    r.seed = cfg.seed;
    r.fingerprint = environment_fingerprint();
    return r;
}

// survival-and-move pushforward of a point intensity, plus births
Eigen::ArrayXd predict_intensity(const Eigen::ArrayXd& lam, const KernelDef& def,
                                 const ScenarioConfig& cfg) {
    Eigen::ArrayXd out =
        (def.per_point.move.transpose() * (lam * def.per_point.survival).matrix()).array();
    if (def.birth) out += intensity(build_process(*def.birth, cfg.space));
    return out;
}

}  // namespace

Tuple sample_dist(const SequenceDist& d, CounterRng& rng) {
    const double target = rng.uniform01() * d.mass();
    const int s = d.space().size();
    double acc = 0.0;
    Tuple last;
    bool have_last = false;
    for (int n = 0; n <= d.n_max(); ++n) {
        Tuple t(static_cast<std::size_t>(n), 0);
        do {
            const double p = d.probability(t);
            if (p > 0.0) {
                acc += p;
                last = t;
                have_last = true;
                if (target < acc) return t;
            }
        } while (n > 0 && next_tuple(s, t));
    }
    if (!have_last) throw DegenerateError("cannot sample from a massless distribution");
    return last;  // rounding pushed the target past the accumulated mass
}

bool RunReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string RunReport::to_text() const {
    std::ostringstream os;
    os << "rng: " << rng_algorithm;
    if (seed) os << " seed=" << *seed;
    os << "\nenv: " << fingerprint << "\n";
    for (std::size_t i = 0; i < step_seconds.size(); ++i)
        os << "step " << (i + 1) << ": " << csv_number(step_seconds[i]) << " s\n";
    int passed = 0;
    for (const auto& c : checks) {
        passed += c.pass;
        os << "check " << c.suite << "/" << c.name << ": " << (c.pass ? "pass" : "FAIL")
           << " (max_error=" << csv_number(c.max_error) << ", " << csv_number(c.seconds)
           << " s)";
        if (!c.note.empty()) os << " -- " << c.note;
        os << "\n";
    }
    if (!checks.empty())
        os << "summary: " << passed << "/" << checks.size() << " checks passed\n";
    return os.str();
}

std::string environment_fingerprint() {
    std::ostringstream os;
#if defined(__clang__)
    os << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
    os << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
    os << "unknown-compiler";
#endif
    os << ", eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
       << EIGEN_MINOR_VERSION;
#if defined(__linux__)
    os << ", linux";
#elif defined(__APPLE__)
    os << ", darwin";
#else
    os << ", unknown-os";
#endif
    os << ", " << sizeof(void*) * 8 << "-bit";
    return os.str();
}

std::string csv_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<GeneratedStep> generate(const ScenarioConfig& cfg) {
    const auto& scen = need_scenario(cfg);
    if (!cfg.seed) throw DomainError("generation needs a seed");
    const auto& meas = need_measurement_space(cfg);
    const auto& lik = need_likelihood(cfg);
    const SequenceDist clutter = build_clutter(cfg, meas);
    const auto kernels = build_step_kernels(cfg);
    const auto lik_kernel = build_likelihood_kernel(lik, cfg.space, meas, clutter,
                                                    clutter.n_max() + kInteractionCap);
    CounterRng rng(*cfg.seed);
    Tuple state = sample_dist(build_process(cfg.processes.at(scen.prior_ref), cfg.space), rng);
    std::vector<GeneratedStep> out;
    for (const auto& step : scen.steps) {
        state = sample_dist(kernels.at(step.kernel_ref).at(state), rng);
        GeneratedStep g;
        g.truth = state;
        g.observation = sample_dist(lik_kernel.at(state), rng);
        out.push_back(std::move(g));
    }
    return out;
}

std::string generate_csv(const ScenarioConfig& cfg) {
    const auto steps = generate(cfg);
    const auto& meas = need_measurement_space(cfg);
    std::string csv = kCsvHeader;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        append_row(csv, static_cast<int>(i) + 1, "truth",
                   tuple_to_string(cfg.space, steps[i].truth), 1.0);
        append_row(csv, static_cast<int>(i) + 1, "obs",
                   tuple_to_string(meas, steps[i].observation), 1.0);
    }
    return csv;
}

FilterRun run_filter(const ScenarioConfig& cfg) {
    const auto& scen = need_scenario(cfg);
    FilterRun run;
    run.report = base_report(cfg);
    run.csv = kCsvHeader;
    const std::string& kind = scen.filter.kind;

    if (kind == "exact" || kind == "independent") {
        const auto& meas = need_measurement_space(cfg);
        const auto& lik = need_likelihood(cfg);
        const SequenceDist clutter = build_clutter(cfg, meas);

        if (kind == "exact") {
            const auto kernels = build_step_kernels(cfg);
            SequenceDist cur = build_process(cfg.processes.at(scen.prior_ref), cfg.space);
            int m_cap = clutter.n_max() + cur.n_max();
            for (const auto& step : scen.steps)
                m_cap = std::max(m_cap, clutter.n_max() + cfg.kernels.at(step.kernel_ref).m_max);
            const auto lik_kernel = build_likelihood_kernel(lik, cfg.space, meas, clutter, m_cap);
            for (std::size_t i = 0; i < scen.steps.size(); ++i) {
                const auto t0 = std::chrono::steady_clock::now();
                cur = chapman_kolmogorov(cur, kernels.at(scen.steps[i].kernel_ref));
                cur = bayes_update(cur, lik_kernel,
                                   step_observation(scen.steps[i], meas, static_cast<int>(i) + 1));
                run.report.step_seconds.push_back(seconds_since(t0));
                emit_distribution(run.csv, static_cast<int>(i) + 1, cur);
            }
            return run;
        }

        // independent-family filter
        ConjugateFamilyState state = build_family(cfg.processes.at(scen.prior_ref), cfg.space);
        for (std::size_t i = 0; i < scen.steps.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto& kd = branching_def(cfg, scen.steps[i].kernel_ref, kind);
            const std::vector<SingleObjectKernel> slot_kernels(
                static_cast<std::size_t>(state.max_slots()), kd.per_point);
            ConjugateFamilyState births;
            births.space = cfg.space;
            if (kd.birth)
                births = build_family(*kd.birth, cfg.space);
            else
                births.hypotheses.push_back({1.0, {}});
            state = predict_independent(state, slot_kernels, births,
                                        scen.filter.max_hypotheses, scen.filter.prune_below);
            SlotLikelihood slot;
            slot.miss = lik.miss;
            slot.detect = lik.detect;
            const std::vector<SlotLikelihood> liks(
                static_cast<std::size_t>(state.max_slots()), slot);
            state = independent_update(
                state, liks, clutter,
                step_observation(scen.steps[i], meas, static_cast<int>(i) + 1),
                scen.filter.at_most_one, scen.filter.max_hypotheses, scen.filter.prune_below);
            run.report.step_seconds.push_back(seconds_since(t0));
            emit_distribution(run.csv, static_cast<int>(i) + 1, state.assemble());
        }
        return run;
    }

    if (kind == "phd") {
        const auto& meas = need_measurement_space(cfg);
        const auto& lik = need_likelihood(cfg);
        const Eigen::ArrayXd rate = clutter_rate(cfg, meas, kind);
        Eigen::ArrayXd lam = intensity(build_process(cfg.processes.at(scen.prior_ref), cfg.space));
        for (std::size_t i = 0; i < scen.steps.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            lam = predict_intensity(lam, branching_def(cfg, scen.steps[i].kernel_ref, kind), cfg);
            lam = phd_update(lam, lik.miss, lik.detect, rate,
                             step_observation(scen.steps[i], meas, static_cast<int>(i) + 1));
            run.report.step_seconds.push_back(seconds_since(t0));
            emit_moments(run.csv, static_cast<int>(i) + 1, cfg.space, lam, nullptr);
        }
        return run;
    }

    if (kind == "gauss_poisson") {
        const auto& meas = need_measurement_space(cfg);
        const auto& lik = need_likelihood(cfg);
        if (!lik.has_pairs())
            throw DomainError("the gauss_poisson filter needs pair detection tables");
        const auto& prior_def = cfg.processes.at(scen.prior_ref);
        if (prior_def.kind != "khinchin" || prior_def.clusters.size() > 2)
            throw DomainError(
                "the gauss_poisson filter needs a khinchin prior with clusters up to pairs");
        if (scen.steps.size() != 1)
            throw DomainError(
                "the gauss_poisson filter reports posterior moments and supports exactly one "
                "step");
        const int s = cfg.space.size();
        GaussPoissonPrior prior;
        prior.space = cfg.space;
        prior.lambda1 = prior_def.clusters.at(0);
        prior.lambda2 = prior_def.clusters.size() > 1
                            ? prior_def.clusters.at(1)
                            : Eigen::ArrayXd::Zero(Eigen::Index(s) * s);
        const auto t0 = std::chrono::steady_clock::now();
        const auto& kd = branching_def(cfg, scen.steps[0].kernel_ref, kind);
        if (kd.birth && kd.birth->kind != "poisson")
            throw DomainError("the gauss_poisson filter needs poisson births");
        Eigen::ArrayXd lam1 = predict_intensity(prior.lambda1, kd, cfg);
        Eigen::ArrayXd lam2 = Eigen::ArrayXd::Zero(Eigen::Index(s) * s);
        for (int y1 = 0; y1 < s; ++y1)
            for (int y2 = 0; y2 < s; ++y2) {
                double v = 0.0;
                for (int x1 = 0; x1 < s; ++x1)
                    for (int x2 = 0; x2 < s; ++x2)
                        v += prior.lambda2[x1 * s + x2] * kd.per_point.survival[x1] *
                             kd.per_point.survival[x2] * kd.per_point.move(x1, y1) *
                             kd.per_point.move(x2, y2);
                lam2[y1 * s + y2] = v;
            }
        prior.lambda1 = std::move(lam1);
        prior.lambda2 = std::move(lam2);
        PairLikelihood pl;
        pl.miss1 = lik.miss;
        pl.detect1 = lik.detect;
        pl.miss2 = lik.pair_miss;
        pl.detect2 = lik.pair_detect;
        const auto [m1, m2] =
            gauss_poisson_update(prior, pl, clutter_rate(cfg, meas, kind),
                                 step_observation(scen.steps[0], meas, 1));
        run.report.step_seconds.push_back(seconds_since(t0));
        emit_moments(run.csv, 1, cfg.space, m1, &m2);
        return run;
    }

    throw DomainError("unknown filter kind '" + kind + "'");
}

FilterRun run_smoother(const ScenarioConfig& cfg) {
    const auto& scen = need_scenario(cfg);
    if (scen.filter.kind != "exact")
        throw DomainError("smoothing needs the exact filter, got '" + scen.filter.kind + "'");
    const auto& meas = need_measurement_space(cfg);
    const auto& lik = need_likelihood(cfg);
    const SequenceDist clutter = build_clutter(cfg, meas);
    const auto kernels = build_step_kernels(cfg);

    FilterRun run;
    run.report = base_report(cfg);
    run.csv = kCsvHeader;

    SequenceDist cur = build_process(cfg.processes.at(scen.prior_ref), cfg.space);
    int m_cap = clutter.n_max() + cur.n_max();
    for (const auto& step : scen.steps)
        m_cap = std::max(m_cap, clutter.n_max() + cfg.kernels.at(step.kernel_ref).m_max);
    const auto lik_kernel = build_likelihood_kernel(lik, cfg.space, meas, clutter, m_cap);

    std::vector<SequenceDist> filtered;
    std::vector<TransitionKernel> links;
    for (std::size_t i = 0; i < scen.steps.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        cur = chapman_kolmogorov(cur, kernels.at(scen.steps[i].kernel_ref));
        cur = bayes_update(cur, lik_kernel,
                           step_observation(scen.steps[i], meas, static_cast<int>(i) + 1));
        run.report.step_seconds.push_back(seconds_since(t0));
        filtered.push_back(cur);
        if (i > 0) links.push_back(kernels.at(scen.steps[i].kernel_ref));
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto smoothed = filtered.empty() ? filtered : smooth(filtered, links);
    run.report.step_seconds.push_back(seconds_since(t0));
    for (std::size_t i = 0; i < smoothed.size(); ++i)
        emit_distribution(run.csv, static_cast<int>(i) + 1, smoothed[i]);
    return run;
}

}  // namespace popcalc
