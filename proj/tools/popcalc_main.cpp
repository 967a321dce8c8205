// popcalc: partition enumeration, population filters/smoother, scenario
// generation, and the cross-module verification registry, driven by a JSON
// config. Exit codes: 0 success, 1 check/runtime failure, 2 config error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "popcalc/config.hpp"
#include "popcalc/errors.hpp"
#include "popcalc/harness.hpp"
#include "popcalc/partitions.hpp"
#include "popcalc/verify.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw popcalc::DomainError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

popcalc::ScenarioConfig load(const std::string& config_path, const std::string& scenario_path,
                             const std::optional<std::uint64_t>& seed, const std::string& out) {
    if (config_path.empty()) throw popcalc::DomainError("--config is required");
    std::vector<std::string> docs = {slurp(config_path)};
    if (!scenario_path.empty()) docs.push_back(slurp(scenario_path));
    auto cfg = popcalc::parse_config_documents(docs);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    return cfg;
}

void write_out(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    f << body;
}

int run_partitions(int n, const std::string& constraint_name) {
    const auto constraint = popcalc::constraint_from_name(constraint_name);
    // the CLI ground set carries state-tagged elements only
    const auto ground = popcalc::GroundSet::states(n);
    popcalc::RestrictedEnumerator en(ground, constraint);
    popcalc::Partition p;
    std::uint64_t count = 0;
    while (en.next(p)) {
        std::cout << p.to_string() << "\n";
        ++count;
    }
    std::cout << "count: " << count << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partition calculus for finite population processes"};
    app.require_subcommand(1);

    std::string config_path, scenario_path, out_path;
    std::optional<std::uint64_t> seed;
    auto add_config_opts = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--scenario", scenario_path,
                        "extra JSON document merged into the config");
        sub->add_option("--out", out_path, "output path (default: config 'out' or stdout)");
        sub->add_option("--seed", seed, "RNG seed override");
    };

    int n = 0;
    std::string constraint_name = "unrestricted";
    auto* partitions = app.add_subcommand("partitions", "enumerate set partitions");
    partitions->add_option("--n", n, "ground set size")->required();
    partitions->add_option("--constraint", constraint_name,
                           "unrestricted | branching | association | at_most_one_measurement");

    auto* filter = app.add_subcommand("filter", "run the configured filter, CSV to --out");
    add_config_opts(filter);
    auto* smoothc = app.add_subcommand("smooth", "forward filter plus backward smoothing pass");
    add_config_opts(smoothc);
    auto* generate = app.add_subcommand("generate", "sample truth and observations");
    add_config_opts(generate);

    std::string suite = "all";
    bool inject = false;
    auto* verify = app.add_subcommand("verify", "run registered cross-module checks");
    verify->add_option("suite", suite,
                       "partitions | calculus | process-core | dynamics | inference | harness | all");
    verify->add_option("--out", out_path, "write the report here as well as stdout");
    verify->add_flag("--inject-failure", inject, "self-test: perturb one check so it fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (partitions->parsed()) return run_partitions(n, constraint_name);

        if (verify->parsed()) {
            const auto report = popcalc::run_verify(suite, {inject});
            const auto text = report.to_text();
            std::cout << text;
            if (!out_path.empty()) write_out(out_path, text);
            return report.all_pass() ? 0 : 1;
        }

        const auto cfg = load(config_path, scenario_path, seed, out_path);
        if (generate->parsed()) {
            write_out(cfg.out, popcalc::generate_csv(cfg));
            return 0;
        }
        const auto run =
            filter->parsed() ? popcalc::run_filter(cfg) : popcalc::run_smoother(cfg);
        write_out(cfg.out, run.csv);
        std::cerr << run.report.to_text();
        return 0;
    } catch (const popcalc::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
