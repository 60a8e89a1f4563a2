#pragma once

#include <stdexcept>
#include <string>

namespace skb {

// Malformed request: bad label, dimension mismatch, unknown name.
struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An object failed one of its stated invariants (trace, positivity, ...).
struct invariant_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Non-finite objective values, eigensolver breakdown and the like.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace skb
