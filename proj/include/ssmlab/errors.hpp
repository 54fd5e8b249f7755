#pragma once

#include <stdexcept>
#include <string>

namespace ssmlab {

// Thrown when a state-transition entry violates |a_i| < 1.
struct stability_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Configuration / experiment-file problems; message names the offending field.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File-system problems; message carries the path involved.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ssmlab
