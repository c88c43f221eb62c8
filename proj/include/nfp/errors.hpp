#pragma once

#include <stdexcept>
#include <string>

namespace nfp {

// Invalid or inconsistent configuration (bad shapes, unknown keys,
// missing files, malformed formats). CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation produced a non-finite value. Carries a short description
// of where it happened (op kind / node index). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A request exceeded a hard limit (e.g. dense-Hessian parameter cap).
// The message names the limit. CLI exit code 4.
class LimitError : public std::runtime_error {
public:
    explicit LimitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nfp
