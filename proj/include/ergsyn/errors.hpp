#pragma once

#include <stdexcept>
#include <string>

namespace ergsyn {

// Bad configuration or arguments (invalid filter spec, infeasible split plan,
// unknown config keys). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (CSV parse failures, degenerate
// signals, leakage between splits). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ergsyn
