#pragma once

// JSON scenario configuration: spaces, named processes and kernels, the
// measurement model, and the filter scenario. Key names are normative and
// unknown keys are rejected so typos fail loudly instead of silently
// defaulting. Parsed configs re-serialize losslessly.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "popcalc/dynamics.hpp"
#include "popcalc/inference.hpp"
#include "popcalc/kernels.hpp"
#include "popcalc/sequence_dist.hpp"
#include "popcalc/space.hpp"

namespace popcalc {

// population prior: kind selects which of the remaining fields apply
struct ProcessDef {
    std::string kind;  // independent | multi_bernoulli | poisson | khinchin | explicit

    // poisson (single entry = point intensity) / khinchin (entry k = clusters
    // of size k+1)
    std::vector<Eigen::ArrayXd> clusters;
    int n_max = 0;
    bool renormalize = false;

    // independent
    Eigen::ArrayXd card_pmf;
    std::vector<std::vector<Eigen::ArrayXd>> marginals;

    // multi_bernoulli
    std::vector<BernoulliComponent> components;

    // explicit: tuples by label, resolved against the space when built
    std::vector<std::vector<std::string>> tuples;
    std::vector<double> tuple_weights;
};

SequenceDist build_process(const ProcessDef& def, const DiscreteSpace& space);
// independent-slot mixture view of the same prior; kinds independent and
// multi_bernoulli only
ConjugateFamilyState build_family(const ProcessDef& def, const DiscreteSpace& space);

struct KernelDef {
    std::string kind;  // explicit | branching | renormalize
    int m_max = 0;

    // branching
    SingleObjectKernel per_point;
    std::optional<ProcessDef> birth;

    // explicit: conditional laws per parent tuple; missing parents are errors
    std::vector<std::pair<std::vector<std::string>, ProcessDef>> entries;

    // renormalize: unordered fine blocks to coarse-point laws
    DiscreteSpace coarse_space;
    Eigen::ArrayXd psi;  // block-count pmf
    Eigen::ArrayXd p_t;  // block-size pmf
    std::vector<std::pair<std::vector<std::string>, Eigen::ArrayXd>> block_kernel;
};

TransitionKernel build_kernel(const KernelDef& def, const DiscreteSpace& space);

// per-point detection model; pair rows are only needed by the pair-cluster
// moment filter
struct LikelihoodDef {
    Eigen::ArrayXd miss;      // defaults to 1 - detect row sums
    Eigen::MatrixXd detect;   // states x measurements
    Eigen::ArrayXd pair_miss;
    Eigen::MatrixXd pair_detect;  // ordered state pairs x measurements

    bool has_pairs() const { return pair_detect.size() > 0; }
};

// measurement kernel for exhaustive updates: per-point detection laws
// superposed with the spurious-measurement process
LikelihoodKernel build_likelihood_kernel(const LikelihoodDef& lik, const DiscreteSpace& states,
                                         const DiscreteSpace& meas, const SequenceDist& clutter,
                                         int m_max);

struct FilterDef {
    std::string kind;  // exact | phd | gauss_poisson | independent
    // independent-family controls
    bool at_most_one = true;
    int max_hypotheses = 100000;
    double prune_below = 0.0;
};

struct ScenarioStep {
    std::string kernel_ref;
    // measurement labels; absent when the scenario is meant for generation
    std::optional<std::vector<std::string>> observation;
};

struct ScenarioDef {
    std::string prior_ref;
    std::vector<ScenarioStep> steps;
    FilterDef filter;
};

struct ScenarioConfig {
    DiscreteSpace space;
    std::optional<DiscreteSpace> measurement_space;
    std::map<std::string, ProcessDef> processes;
    std::map<std::string, KernelDef> kernels;
    std::optional<LikelihoodDef> likelihood;
    std::optional<ProcessDef> clutter;  // built over the measurement space
    std::optional<ScenarioDef> scenario;
    std::optional<std::uint64_t> seed;
    std::string out;  // default output path; empty writes to stdout
};

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
// several documents merged into one config; duplicate top-level keys are
// rejected (lets a scenario file ride alongside a base config)
ScenarioConfig parse_config_documents(const std::vector<std::string>& texts);
// parse(serialize(c)) reproduces c, byte-for-byte at the JSON level
std::string serialize_config(const ScenarioConfig& cfg);

// conjugate-family state round trip; doubles survive exactly
std::string family_to_json(const ConjugateFamilyState& s);
ConjugateFamilyState family_from_json(const std::string& text);

}  // namespace popcalc
