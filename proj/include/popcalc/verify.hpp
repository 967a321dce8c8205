#pragma once

// Cross-module invariant checks behind one registry: every suite's declared
// properties run as named checks, so a single command exercises the whole
// library. Check bodies are small and deterministic; failures carry the
// observed error.

#include <string>
#include <vector>

#include "popcalc/harness.hpp"

namespace popcalc {

struct VerifyOptions {
    // flips a designated comparison so the failure path itself is testable
    bool inject_failure = false;
};

// suites in fixed order: partitions, calculus, process-core, dynamics,
// inference, harness
std::vector<std::string> verify_suites();

// suite name or "all"; unknown names are errors
RunReport run_verify(const std::string& suite, const VerifyOptions& opts = {});

}  // namespace popcalc
