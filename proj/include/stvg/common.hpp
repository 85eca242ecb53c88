#pragma once

#include <stdexcept>

namespace stvg {

// Malformed or inconsistent input data. Mapped to exit code 1 in the CLI.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameter or configuration combination. Mapped to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace stvg
