#pragma once

#include <stdexcept>
#include <string>

namespace hhgq {

// Exit codes used by the command-line driver.
enum class ExitCode : int { Ok = 0, Config = 2, Numeric = 3, Cache = 4 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by the engines on NaN/Inf, non-convergence or loss of positivity.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CacheError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hhgq
