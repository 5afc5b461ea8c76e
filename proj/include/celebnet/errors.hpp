#ifndef CELEBNET_ERRORS_HPP
#define CELEBNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace celebnet {

// Invalid argument values (out-of-range parameters, malformed permutations,
// inconsistent counts). CLI maps this to exit code 2.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A decision policy was asked about a graph family it does not cover.
// CLI maps this to exit code 2.
class PolicyError : public std::logic_error {
public:
    explicit PolicyError(const std::string& what) : std::logic_error(what) {}
};

// A computation exceeded a configured cap (enumeration size, memory budget).
// CLI maps this to exit code 3.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / stream failure. CLI maps this to exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace celebnet

#endif
