#pragma once

#include <stdexcept>
#include <string>

namespace gapfill {

// Error taxonomy mirrors the CLI exit codes: config 2, data 3, numeric 4.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gapfill
