#ifndef AIRFL_ERRORS_HPP
#define AIRFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace airfl {

// Invalid experiment or system configuration (bad divisibility, bad file, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched vector/matrix dimensions between pipeline stages.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed numeric input (non-finite entries, negative variances, ...).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace airfl

#endif  // AIRFL_ERRORS_HPP
