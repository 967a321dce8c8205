#pragma once

// Deterministic scenario driver: inverse-CDF sampling, synthetic data
// generation, filter and smoother runs with CSV emission, and run reports.
// All output is byte-stable for a fixed config and seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popcalc/config.hpp"
#include "popcalc/rng.hpp"

namespace popcalc {

// inverse-CDF draw over the dense tuple enumeration, cardinality-major
Tuple sample_dist(const SequenceDist& d, CounterRng& rng);

struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    double seconds = 0.0;
    std::string note;
};

struct RunReport {
    std::string rng_algorithm;  // named generator, recorded with its seed
    std::optional<std::uint64_t> seed;
    std::string fingerprint;    // toolchain and platform
    std::vector<double> step_seconds;
    std::vector<CheckResult> checks;

    bool all_pass() const;
    std::string to_text() const;
};

std::string environment_fingerprint();

// formats a double so that parsing the text recovers the value exactly
std::string csv_number(double v);

struct GeneratedStep {
    Tuple truth;
    Observation observation;
};

// samples the state chain through the step kernels and one observation set
// per step; requires a seed
std::vector<GeneratedStep> generate(const ScenarioConfig& cfg);
// columns step,kind,tuple,value with kind in {truth,obs}
std::string generate_csv(const ScenarioConfig& cfg);

struct FilterRun {
    std::string csv;
    RunReport report;
};

// alternates prediction and the configured update; CSV columns
// step,kind,tuple,value with kind in {P,J,M1,M2,card}, step-major, tuples in
// canonical enumeration order
FilterRun run_filter(const ScenarioConfig& cfg);
// forward pass plus backward reweighting; exact filter scenarios only
FilterRun run_smoother(const ScenarioConfig& cfg);

}  // namespace popcalc
