#pragma once

#include <stdexcept>
#include <string>

namespace kgxrec {

// Error taxonomy mirrored by the CLI exit codes:
// usage/config = 1, data = 2, numeric = 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kgxrec
