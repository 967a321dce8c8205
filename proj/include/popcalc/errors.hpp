#pragma once

#include <stdexcept>
#include <string>

namespace popcalc {

// Invalid inputs: malformed pmfs, out-of-range orders, bad configs, unknown keys.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid model that degenerates for the requested operation:
// zero normalizer, zero-evidence observation, smoothing support violation.
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace popcalc
