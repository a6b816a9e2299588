#pragma once

#include <stdexcept>

namespace mcvd {

// Invalid setup: bad shapes, out-of-range hyperparameters, malformed config.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse at run time: backward before forward, out-of-range action index.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

// A training loss turned non-finite; message carries the step diagnostic.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mcvd
