#include "popcalc/config.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "popcalc/errors.hpp"

namespace popcalc {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& ctx, const std::string& msg) {
    throw DomainError(ctx + ": " + msg);
}

const json& need(const json& j, const std::string& ctx, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) fail(ctx, std::string("missing key '") + key + "'");
    return *it;
}

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(ctx, "expected an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* a) { return k == a; }))
            fail(ctx, "unknown key '" + k + "'");
    }
}

double number(const json& j, const std::string& ctx) {
    if (!j.is_number()) fail(ctx, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) fail(ctx, "expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) fail(ctx, "expected a boolean");
    return j.get<bool>();
}

std::string text(const json& j, const std::string& ctx) {
    if (!j.is_string()) fail(ctx, "expected a string");
    return j.get<std::string>();
}

Eigen::ArrayXd array1d(const json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ctx, "expected an array of numbers");
    Eigen::ArrayXd out(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& v : j) out[i++] = number(v, ctx);
    return out;
}

Eigen::MatrixXd matrix2d(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) fail(ctx, "expected a non-empty array of rows");
    const auto cols = j.front().is_array() ? j.front().size() : 0;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    Eigen::Index r = 0;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != cols) fail(ctx, "ragged matrix rows");
        Eigen::Index c = 0;
        for (const auto& v : row) out(r, c++) = number(v, ctx);
        ++r;
    }
    return out;
}

std::vector<std::string> string_list(const json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ctx, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) out.push_back(text(v, ctx));
    return out;
}

DiscreteSpace parse_space(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"size", "labels", "coords"});
    DiscreteSpace space;
    if (j.contains("labels")) {
        space = DiscreteSpace::named(string_list(j.at("labels"), ctx + ".labels"));
        if (j.contains("size") && integer(j.at("size"), ctx + ".size") != space.size())
            fail(ctx, "size disagrees with the label count");
    } else if (j.contains("size")) {
        const int n = integer(j.at("size"), ctx + ".size");
        if (n <= 0) fail(ctx, "size must be positive");
        space = DiscreteSpace::with_size(n);
    } else {
        fail(ctx, "needs 'size' or 'labels'");
    }
    if (j.contains("coords")) {
        space.coords = matrix2d(j.at("coords"), ctx + ".coords");
        if (space.coords.rows() != space.size()) fail(ctx, "coords needs one row per point");
    }
    return space;
}

ProcessDef parse_process(const json& j, const std::string& ctx) {
    ProcessDef def;
    if (!j.is_object()) fail(ctx, "expected an object");
    def.kind = text(need(j, ctx, "kind"), ctx + ".kind");
    if (def.kind == "poisson") {
        check_keys(j, ctx, {"kind", "lambda", "n_max", "renormalize"});
        def.clusters.push_back(array1d(need(j, ctx, "lambda"), ctx + ".lambda"));
        def.n_max = integer(need(j, ctx, "n_max"), ctx + ".n_max");
        if (j.contains("renormalize"))
            def.renormalize = boolean(j.at("renormalize"), ctx + ".renormalize");
    } else if (def.kind == "khinchin") {
        check_keys(j, ctx, {"kind", "clusters", "n_max", "renormalize"});
        const auto& cl = need(j, ctx, "clusters");
        if (!cl.is_array() || cl.empty()) fail(ctx, "clusters must list at least one array");
        for (std::size_t k = 0; k < cl.size(); ++k)
            def.clusters.push_back(
                array1d(cl.at(k), ctx + ".clusters[" + std::to_string(k) + "]"));
        def.n_max = integer(need(j, ctx, "n_max"), ctx + ".n_max");
        if (j.contains("renormalize"))
            def.renormalize = boolean(j.at("renormalize"), ctx + ".renormalize");
    } else if (def.kind == "independent") {
        check_keys(j, ctx, {"kind", "card_pmf", "marginals"});
        def.card_pmf = array1d(need(j, ctx, "card_pmf"), ctx + ".card_pmf");
        const auto& ms = need(j, ctx, "marginals");
        if (!ms.is_array()) fail(ctx, "marginals must be an array per cardinality");
        for (std::size_t n = 0; n < ms.size(); ++n) {
            const auto& row = ms.at(n);
            const std::string rc = ctx + ".marginals[" + std::to_string(n) + "]";
            if (!row.is_array() || row.size() != n) fail(rc, "needs one marginal per slot");
            std::vector<Eigen::ArrayXd> slots;
            for (const auto& s : row) slots.push_back(array1d(s, rc));
            def.marginals.push_back(std::move(slots));
        }
        if (static_cast<Eigen::Index>(def.marginals.size()) != def.card_pmf.size())
            fail(ctx, "marginals must match the cardinality pmf length");
        def.n_max = static_cast<int>(def.marginals.size()) - 1;
    } else if (def.kind == "multi_bernoulli") {
        check_keys(j, ctx, {"kind", "components"});
        const auto& cs = need(j, ctx, "components");
        if (!cs.is_array()) fail(ctx, "components must be an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string cc = ctx + ".components[" + std::to_string(i) + "]";
            check_keys(cs.at(i), cc, {"exist", "location"});
            BernoulliComponent c;
            c.q = number(need(cs.at(i), cc, "exist"), cc + ".exist");
            c.location = array1d(need(cs.at(i), cc, "location"), cc + ".location");
            def.components.push_back(std::move(c));
        }
        def.n_max = static_cast<int>(def.components.size());
    } else if (def.kind == "explicit") {
        check_keys(j, ctx, {"kind", "tuples", "weights"});
        const auto& ts = need(j, ctx, "tuples");
        if (!ts.is_array()) fail(ctx, "tuples must be an array of label lists");
        for (std::size_t i = 0; i < ts.size(); ++i)
            def.tuples.push_back(
                string_list(ts.at(i), ctx + ".tuples[" + std::to_string(i) + "]"));
        const auto& ws = need(j, ctx, "weights");
        if (!ws.is_array() || ws.size() != def.tuples.size())
            fail(ctx, "weights must pair up with tuples");
        for (const auto& w : ws) def.tuple_weights.push_back(number(w, ctx + ".weights"));
        def.n_max = 0;
        for (const auto& t : def.tuples)
            def.n_max = std::max(def.n_max, static_cast<int>(t.size()));
    } else {
        fail(ctx, "unknown process kind '" + def.kind + "'");
    }
    return def;
}

SingleObjectKernel parse_per_point(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"survival", "move"});
    SingleObjectKernel k;
    k.survival = array1d(need(j, ctx, "survival"), ctx + ".survival");
    k.move = matrix2d(need(j, ctx, "move"), ctx + ".move");
    return k;
}

KernelDef parse_kernel(const json& j, const std::string& ctx) {
    KernelDef def;
    if (!j.is_object()) fail(ctx, "expected an object");
    def.kind = text(need(j, ctx, "kind"), ctx + ".kind");
    def.m_max = integer(need(j, ctx, "m_max"), ctx + ".m_max");
    if (def.m_max < 0) fail(ctx, "m_max must be non-negative");
    if (def.kind == "branching") {
        check_keys(j, ctx, {"kind", "m_max", "per_point", "birth"});
        def.per_point = parse_per_point(need(j, ctx, "per_point"), ctx + ".per_point");
        if (j.contains("birth")) def.birth = parse_process(j.at("birth"), ctx + ".birth");
    } else if (def.kind == "explicit") {
        check_keys(j, ctx, {"kind", "m_max", "entries"});
        const auto& es = need(j, ctx, "entries");
        if (!es.is_array()) fail(ctx, "entries must be an array");
        for (std::size_t i = 0; i < es.size(); ++i) {
            const std::string ec = ctx + ".entries[" + std::to_string(i) + "]";
            check_keys(es.at(i), ec, {"parents", "process"});
            def.entries.emplace_back(
                string_list(need(es.at(i), ec, "parents"), ec + ".parents"),
                parse_process(need(es.at(i), ec, "process"), ec + ".process"));
        }
    } else if (def.kind == "renormalize") {
        check_keys(j, ctx, {"kind", "m_max", "coarse_space", "interaction"});
        def.coarse_space = parse_space(need(j, ctx, "coarse_space"), ctx + ".coarse_space");
        const auto& in = need(j, ctx, "interaction");
        const std::string ic = ctx + ".interaction";
        check_keys(in, ic, {"psi", "p_p", "p_t", "block_kernel"});
        if (in.contains("p_p"))
            fail(ic, "'p_p' is not used by renormalize kernels");
        def.psi = array1d(need(in, ic, "psi"), ic + ".psi");
        def.p_t = array1d(need(in, ic, "p_t"), ic + ".p_t");
        const auto& bk = need(in, ic, "block_kernel");
        if (!bk.is_array()) fail(ic, "block_kernel must be an array");
        for (std::size_t i = 0; i < bk.size(); ++i) {
            const std::string bc = ic + ".block_kernel[" + std::to_string(i) + "]";
            check_keys(bk.at(i), bc, {"block", "dist"});
            def.block_kernel.emplace_back(
                string_list(need(bk.at(i), bc, "block"), bc + ".block"),
                array1d(need(bk.at(i), bc, "dist"), bc + ".dist"));
        }
    } else {
        fail(ctx, "unknown kernel kind '" + def.kind + "'");
    }
    return def;
}

LikelihoodDef parse_likelihood(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"miss", "detect", "pair_miss", "pair_detect"});
    LikelihoodDef def;
    def.detect = matrix2d(need(j, ctx, "detect"), ctx + ".detect");
    if (j.contains("miss"))
        def.miss = array1d(j.at("miss"), ctx + ".miss");
    else
        def.miss = 1.0 - def.detect.rowwise().sum().array();
    if (def.miss.size() != def.detect.rows()) fail(ctx, "miss must have one entry per state");
    if (j.contains("pair_detect")) {
        def.pair_detect = matrix2d(j.at("pair_detect"), ctx + ".pair_detect");
        if (j.contains("pair_miss"))
            def.pair_miss = array1d(j.at("pair_miss"), ctx + ".pair_miss");
        else
            def.pair_miss = 1.0 - def.pair_detect.rowwise().sum().array();
        if (def.pair_miss.size() != def.pair_detect.rows())
            fail(ctx, "pair_miss must have one entry per ordered pair");
    } else if (j.contains("pair_miss")) {
        fail(ctx, "pair_miss without pair_detect");
    }
    for (Eigen::Index i = 0; i < def.miss.size(); ++i)
        if (def.miss[i] < -1e-12 || def.miss[i] > 1.0 + 1e-12)
            fail(ctx, "miss probabilities must lie in [0, 1]");
    return def;
}

FilterDef parse_filter(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"kind", "at_most_one", "max_hypotheses", "prune_below"});
    FilterDef def;
    def.kind = text(need(j, ctx, "kind"), ctx + ".kind");
    static const char* kinds[] = {"exact", "phd", "gauss_poisson", "independent"};
    if (std::none_of(std::begin(kinds), std::end(kinds),
                     [&](const char* k) { return def.kind == k; }))
        fail(ctx, "unknown filter kind '" + def.kind + "'");
    const bool indep = def.kind == "independent";
    for (const char* k : {"at_most_one", "max_hypotheses", "prune_below"})
        if (j.contains(k) && !indep)
            fail(ctx, std::string("'") + k + "' only applies to the independent filter");
    if (j.contains("at_most_one")) def.at_most_one = boolean(j.at("at_most_one"), ctx);
    if (j.contains("max_hypotheses")) def.max_hypotheses = integer(j.at("max_hypotheses"), ctx);
    if (j.contains("prune_below")) def.prune_below = number(j.at("prune_below"), ctx);
    return def;
}

ScenarioDef parse_scenario(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"prior_ref", "steps", "filter"});
    ScenarioDef def;
    def.prior_ref = text(need(j, ctx, "prior_ref"), ctx + ".prior_ref");
    const auto& steps = need(j, ctx, "steps");
    if (!steps.is_array()) fail(ctx, "steps must be an array");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string sc = ctx + ".steps[" + std::to_string(i) + "]";
        check_keys(steps.at(i), sc, {"kernel_ref", "observation"});
        ScenarioStep step;
        step.kernel_ref = text(need(steps.at(i), sc, "kernel_ref"), sc + ".kernel_ref");
        if (steps.at(i).contains("observation"))
            step.observation = string_list(steps.at(i).at("observation"), sc + ".observation");
        def.steps.push_back(std::move(step));
    }
    def.filter = parse_filter(need(j, ctx, "filter"), ctx + ".filter");
    return def;
}

ScenarioConfig parse_document(const json& doc) {
    const std::string ctx = "config";
    check_keys(doc, ctx,
               {"space", "measurement_space", "processes", "kernels", "likelihood", "clutter",
                "scenario", "seed", "out"});
    ScenarioConfig cfg;
    cfg.space = parse_space(need(doc, ctx, "space"), ctx + ".space");
    if (doc.contains("measurement_space"))
        cfg.measurement_space =
            parse_space(doc.at("measurement_space"), ctx + ".measurement_space");
    if (doc.contains("processes")) {
        if (!doc.at("processes").is_object()) fail(ctx, "processes must be an object");
        for (const auto& [name, p] : doc.at("processes").items())
            cfg.processes.emplace(name, parse_process(p, "process '" + name + "'"));
    }
    if (doc.contains("kernels")) {
        if (!doc.at("kernels").is_object()) fail(ctx, "kernels must be an object");
        for (const auto& [name, k] : doc.at("kernels").items())
            cfg.kernels.emplace(name, parse_kernel(k, "kernel '" + name + "'"));
    }
    if (doc.contains("likelihood"))
        cfg.likelihood = parse_likelihood(doc.at("likelihood"), ctx + ".likelihood");
    if (doc.contains("clutter")) cfg.clutter = parse_process(doc.at("clutter"), ctx + ".clutter");
    if (doc.contains("scenario"))
        cfg.scenario = parse_scenario(doc.at("scenario"), ctx + ".scenario");
    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (!s.is_number_unsigned()) fail(ctx, "seed must be an unsigned integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("out")) cfg.out = text(doc.at("out"), ctx + ".out");

    // every reference must resolve
    if (cfg.scenario) {
        if (!cfg.processes.count(cfg.scenario->prior_ref))
            fail(ctx, "prior_ref '" + cfg.scenario->prior_ref + "' is not a defined process");
        for (const auto& step : cfg.scenario->steps)
            if (!cfg.kernels.count(step.kernel_ref))
                fail(ctx, "kernel_ref '" + step.kernel_ref + "' is not a defined kernel");
    }
    if ((cfg.likelihood || cfg.clutter) && !cfg.measurement_space)
        fail(ctx, "likelihood and clutter need a measurement_space");
    return cfg;
}

json merged_documents(const std::vector<std::string>& texts) {
    json doc = json::object();
    for (const auto& t : texts) {
        json part;
        try {
            part = json::parse(t);
        } catch (const json::parse_error& e) {
            throw DomainError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!part.is_object()) throw DomainError("config root must be a JSON object");
        for (const auto& [k, v] : part.items()) {
            if (doc.contains(k))
                throw DomainError("config documents both define top-level key '" + k + "'");
            doc[k] = v;
        }
    }
    return doc;
}

// --- serialization ----------------------------------------------------------

ordered space_json(const DiscreteSpace& s) {
    ordered j;
    j["labels"] = s.labels;
    if (s.has_coords()) {
        ordered rows = ordered::array();
        for (Eigen::Index r = 0; r < s.coords.rows(); ++r) {
            ordered row = ordered::array();
            for (Eigen::Index c = 0; c < s.coords.cols(); ++c) row.push_back(s.coords(r, c));
            rows.push_back(std::move(row));
        }
        j["coords"] = std::move(rows);
    }
    return j;
}

ordered array_json(const Eigen::ArrayXd& a) {
    ordered j = ordered::array();
    for (Eigen::Index i = 0; i < a.size(); ++i) j.push_back(a[i]);
    return j;
}

ordered matrix_json(const Eigen::MatrixXd& m) {
    ordered j = ordered::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered row = ordered::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(std::move(row));
    }
    return j;
}

ordered process_json(const ProcessDef& d) {
    ordered j;
    j["kind"] = d.kind;
    if (d.kind == "poisson") {
        j["lambda"] = array_json(d.clusters.at(0));
        j["n_max"] = d.n_max;
        j["renormalize"] = d.renormalize;
    } else if (d.kind == "khinchin") {
        ordered cl = ordered::array();
        for (const auto& c : d.clusters) cl.push_back(array_json(c));
        j["clusters"] = std::move(cl);
        j["n_max"] = d.n_max;
        j["renormalize"] = d.renormalize;
    } else if (d.kind == "independent") {
        j["card_pmf"] = array_json(d.card_pmf);
        ordered ms = ordered::array();
        for (const auto& slots : d.marginals) {
            ordered row = ordered::array();
            for (const auto& s : slots) row.push_back(array_json(s));
            ms.push_back(std::move(row));
        }
        j["marginals"] = std::move(ms);
    } else if (d.kind == "multi_bernoulli") {
        ordered cs = ordered::array();
        for (const auto& c : d.components) {
            ordered cj;
            cj["exist"] = c.q;
            cj["location"] = array_json(c.location);
            cs.push_back(std::move(cj));
        }
        j["components"] = std::move(cs);
    } else {  // explicit
        j["tuples"] = d.tuples;
        j["weights"] = d.tuple_weights;
    }
    return j;
}

ordered kernel_json(const KernelDef& d) {
    ordered j;
    j["kind"] = d.kind;
    j["m_max"] = d.m_max;
    if (d.kind == "branching") {
        ordered pp;
        pp["survival"] = array_json(d.per_point.survival);
        pp["move"] = matrix_json(d.per_point.move);
        j["per_point"] = std::move(pp);
        if (d.birth) j["birth"] = process_json(*d.birth);
    } else if (d.kind == "explicit") {
        ordered es = ordered::array();
        for (const auto& [parents, p] : d.entries) {
            ordered e;
            e["parents"] = parents;
            e["process"] = process_json(p);
            es.push_back(std::move(e));
        }
        j["entries"] = std::move(es);
    } else {  // renormalize
        j["coarse_space"] = space_json(d.coarse_space);
        ordered in;
        in["psi"] = array_json(d.psi);
        in["p_t"] = array_json(d.p_t);
        ordered bk = ordered::array();
        for (const auto& [block, dist] : d.block_kernel) {
            ordered b;
            b["block"] = block;
            b["dist"] = array_json(dist);
            bk.push_back(std::move(b));
        }
        in["block_kernel"] = std::move(bk);
        j["interaction"] = std::move(in);
    }
    return j;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    return parse_config_documents({json_text});
}

ScenarioConfig parse_config_documents(const std::vector<std::string>& texts) {
    return parse_document(merged_documents(texts));
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    ordered j;
    j["space"] = space_json(cfg.space);
    if (cfg.measurement_space) j["measurement_space"] = space_json(*cfg.measurement_space);
    if (!cfg.processes.empty()) {
        ordered ps;
        for (const auto& [name, p] : cfg.processes) ps[name] = process_json(p);
        j["processes"] = std::move(ps);
    }
    if (!cfg.kernels.empty()) {
        ordered ks;
        for (const auto& [name, k] : cfg.kernels) ks[name] = kernel_json(k);
        j["kernels"] = std::move(ks);
    }
    if (cfg.likelihood) {
        ordered lj;
        lj["miss"] = array_json(cfg.likelihood->miss);
        lj["detect"] = matrix_json(cfg.likelihood->detect);
        if (cfg.likelihood->has_pairs()) {
            lj["pair_miss"] = array_json(cfg.likelihood->pair_miss);
            lj["pair_detect"] = matrix_json(cfg.likelihood->pair_detect);
        }
        j["likelihood"] = std::move(lj);
    }
    if (cfg.clutter) j["clutter"] = process_json(*cfg.clutter);
    if (cfg.scenario) {
        ordered sj;
        sj["prior_ref"] = cfg.scenario->prior_ref;
        ordered steps = ordered::array();
        for (const auto& s : cfg.scenario->steps) {
            ordered st;
            st["kernel_ref"] = s.kernel_ref;
            if (s.observation) st["observation"] = *s.observation;
            steps.push_back(std::move(st));
        }
        sj["steps"] = std::move(steps);
        ordered fj;
        fj["kind"] = cfg.scenario->filter.kind;
        if (cfg.scenario->filter.kind == "independent") {
            fj["at_most_one"] = cfg.scenario->filter.at_most_one;
            fj["max_hypotheses"] = cfg.scenario->filter.max_hypotheses;
            fj["prune_below"] = cfg.scenario->filter.prune_below;
        }
        sj["filter"] = std::move(fj);
        j["scenario"] = std::move(sj);
    }
    if (cfg.seed) j["seed"] = *cfg.seed;
    if (!cfg.out.empty()) j["out"] = cfg.out;
    return j.dump(2) + "\n";
}

// --- builders ---------------------------------------------------------------

SequenceDist build_process(const ProcessDef& def, const DiscreteSpace& space) {
    if (def.kind == "poisson") return make_poisson(space, def.clusters.at(0), def.n_max,
                                                   def.renormalize);
    if (def.kind == "khinchin")
        return make_khinchin(KhinchinFamily{space, def.clusters}, def.n_max, def.renormalize);
    if (def.kind == "independent") return make_independent(space, def.card_pmf, def.marginals);
    if (def.kind == "multi_bernoulli") return make_multi_bernoulli(space, def.components);
    // explicit
    std::vector<Eigen::ArrayXd> weights;
    for (int n = 0; n <= def.n_max; ++n)
        weights.push_back(Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(
            tuple_count(space.size(), n))));
    for (std::size_t i = 0; i < def.tuples.size(); ++i) {
        const Tuple t = tuple_from_labels(space, def.tuples[i]);
        auto& cell = weights[t.size()][static_cast<Eigen::Index>(tuple_index(space.size(), t))];
        if (cell != 0.0) throw DomainError("explicit process lists a tuple twice");
        cell = def.tuple_weights[i];
    }
    return SequenceDist(space, std::move(weights));
}

ConjugateFamilyState build_family(const ProcessDef& def, const DiscreteSpace& space) {
    if (def.kind == "independent")
        return ConjugateFamilyState::independent_family(space, def.card_pmf, def.marginals);
    if (def.kind == "multi_bernoulli") {
        ConjugateFamilyState state;
        state.space = space;
        const std::size_t k = def.components.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
            ConjugateHypothesis hyp;
            hyp.weight = 1.0;
            for (std::size_t i = 0; i < k; ++i) {
                const auto& c = def.components[i];
                if (mask & (std::size_t{1} << i)) {
                    hyp.weight *= c.q;
                    hyp.slots.push_back(c.location);
                } else {
                    hyp.weight *= 1.0 - c.q;
                }
            }
            if (hyp.weight > 0.0) state.hypotheses.push_back(std::move(hyp));
        }
        return state;
    }
    throw DomainError("kind '" + def.kind + "' has no independent-slot mixture form");
}

TransitionKernel build_kernel(const KernelDef& def, const DiscreteSpace& space) {
    if (def.kind == "branching") {
        if (def.per_point.survival.size() != space.size() ||
            def.per_point.move.rows() != space.size())
            throw DomainError("branching kernel per_point tables must match the space");
        const auto per = bernoulli_kernel(space, space, def.per_point);
        const SequenceDist birth = def.birth ? build_process(*def.birth, space)
                                             : SequenceDist::empty_process(space);
        return branching_kernel(per, birth, def.m_max);
    }
    if (def.kind == "explicit") {
        auto table = std::make_shared<std::map<Tuple, SequenceDist>>();
        for (const auto& [labels, p] : def.entries) {
            const Tuple t = tuple_from_labels(space, labels);
            if (!table->emplace(t, build_process(p, space)).second)
                throw DomainError("explicit kernel lists parents twice: " +
                                  tuple_to_string(space, t));
        }
        return TransitionKernel(space, space, def.m_max,
                                [table, space](const Tuple& parents) -> SequenceDist {
                                    const auto it = table->find(parents);
                                    if (it == table->end())
                                        throw DomainError(
                                            "explicit kernel has no entry for parents " +
                                            tuple_to_string(space, parents));
                                    return it->second;
                                });
    }
    // renormalize
    auto table = std::make_shared<std::map<Tuple, Eigen::ArrayXd>>();
    for (const auto& [labels, dist] : def.block_kernel) {
        Tuple t = tuple_from_labels(space, labels);
        std::sort(t.begin(), t.end());
        if (dist.size() != def.coarse_space.size())
            throw DomainError("block_kernel dist must cover the coarse space");
        if (!table->emplace(std::move(t), dist).second)
            throw DomainError("block_kernel lists a block twice");
    }
    RenormSpec spec;
    spec.fine_space = space;
    spec.coarse_space = def.coarse_space;
    spec.group_count_pmf = def.psi;
    spec.block_size_pmf = def.p_t;
    const int coarse = def.coarse_space.size();
    spec.block_kernel = [table, coarse](const Tuple& block) -> Eigen::ArrayXd {
        Tuple key = block;
        std::sort(key.begin(), key.end());
        const auto it = table->find(key);
        if (it == table->end()) return Eigen::ArrayXd::Zero(coarse);  // infeasible block
        return it->second;
    };
    return TransitionKernel(space, def.coarse_space, def.m_max,
                            [spec](const Tuple& parents) { return renormalize(spec, parents); });
}

LikelihoodKernel build_likelihood_kernel(const LikelihoodDef& lik, const DiscreteSpace& states,
                                         const DiscreteSpace& meas, const SequenceDist& clutter,
                                         int m_max) {
    if (lik.detect.rows() != states.size() || lik.detect.cols() != meas.size())
        throw DomainError("detect table must be states x measurements");
    std::vector<SequenceDist> per_point;
    for (int x = 0; x < states.size(); ++x) {
        std::vector<Eigen::ArrayXd> w(2);
        w[0] = Eigen::ArrayXd::Constant(1, lik.miss[x]);
        w[1] = lik.detect.row(x).transpose().array();
        per_point.emplace_back(meas, std::move(w));
    }
    return LikelihoodKernel(states, meas, m_max,
                            [per_point, clutter](const Tuple& t) {
                                SequenceDist d = clutter;
                                for (int x : t)
                                    d = superpose(d, per_point[static_cast<std::size_t>(x)]);
                                return d;
                            });
}

// --- conjugate-family round trip --------------------------------------------

std::string family_to_json(const ConjugateFamilyState& s) {
    ordered j;
    j["space"] = space_json(s.space);
    ordered hs = ordered::array();
    for (const auto& h : s.hypotheses) {
        ordered hj;
        hj["weight"] = h.weight;
        ordered slots = ordered::array();
        for (const auto& m : h.slots) slots.push_back(array_json(m));
        hj["slots"] = std::move(slots);
        hs.push_back(std::move(hj));
    }
    j["hypotheses"] = std::move(hs);
    return j.dump(2) + "\n";
}

ConjugateFamilyState family_from_json(const std::string& text_in) {
    json doc;
    try {
        doc = json::parse(text_in);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("family state is not valid JSON: ") + e.what());
    }
    const std::string ctx = "family";
    check_keys(doc, ctx, {"space", "hypotheses"});
    ConjugateFamilyState s;
    s.space = parse_space(need(doc, ctx, "space"), ctx + ".space");
    const auto& hs = need(doc, ctx, "hypotheses");
    if (!hs.is_array()) fail(ctx, "hypotheses must be an array");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const std::string hc = ctx + ".hypotheses[" + std::to_string(i) + "]";
        check_keys(hs.at(i), hc, {"weight", "slots"});
        ConjugateHypothesis h;
        h.weight = number(need(hs.at(i), hc, "weight"), hc + ".weight");
        const auto& slots = need(hs.at(i), hc, "slots");
        if (!slots.is_array()) fail(hc, "slots must be an array");
        for (const auto& m : slots) {
            h.slots.push_back(array1d(m, hc + ".slots"));
            if (h.slots.back().size() != s.space.size())
                fail(hc, "slot marginal must cover the space");
        }
        s.hypotheses.push_back(std::move(h));
    }
    return s;
}

}  // namespace popcalc
