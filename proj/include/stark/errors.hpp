#pragma once

#include <stdexcept>
#include <string>

namespace stark {

// Invalid argument values or argument combinations.
struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A state (or key) that does not belong to the container queried.
struct LookupError : std::out_of_range {
    explicit LookupError(const std::string& what) : std::out_of_range(what) {}
};

// Problem size exceeds a configured cap.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// An algorithm failed to converge or produced out-of-contract values.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An operator was paired with a basis it is not defined on.
struct ModelMismatchError : std::invalid_argument {
    explicit ModelMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// Configuration file problems (unknown keys, bad ranges, missing fields).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stark
