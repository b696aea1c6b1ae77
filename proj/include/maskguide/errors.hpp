#pragma once

#include <stdexcept>
#include <string>

namespace mg {

// Error taxonomy mirrors the CLI exit codes: config 2, checkpoint 3,
// geometry 4, numeric 5.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check_arg(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace mg
