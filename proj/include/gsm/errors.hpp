#pragma once

#include <stdexcept>
#include <string>

namespace gsm {

// Error categories map onto CLI exit codes: config=2, data=3, numeric=4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gsm
