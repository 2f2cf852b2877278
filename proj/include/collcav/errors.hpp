#ifndef COLLCAV_ERRORS_HPP
#define COLLCAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace collcav {

// Bad user input: invalid dims, malformed recipes, unknown modes, config files.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Internal consistency violation: Hermiticity defects, imaginary residues,
// unreachable integrator tolerances. Signals a bug or an unusable setup,
// not a user typo.
class InvariantError : public std::runtime_error {
public:
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace collcav

#endif
