#pragma once

#include <stdexcept>
#include <string>

namespace niwalk {

/// Operation applied to an object in the wrong state (dead pair, intersecting
/// initial curves, insufficient span).
struct invalid_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested truncation depth below lattice resolution.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every particle of an ensemble died at one shell.
struct extinction_error : std::runtime_error {
    extinction_error(int shell_index, const std::string& what)
        : std::runtime_error(what), shell(shell_index) {}
    int shell;
};

/// A walker left the packable coordinate range |c| < 2^20.
struct coordinate_overflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed artifact or checkpoint content.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace niwalk
