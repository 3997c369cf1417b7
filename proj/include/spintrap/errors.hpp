#pragma once

#include <stdexcept>
#include <string>

namespace spintrap {

/// Non-positive or otherwise unusable physical parameters.
class invalid_config_error : public std::invalid_argument {
public:
    explicit invalid_config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical/physical domain of an operation.
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

/// A numerical routine failed to reach its accuracy target.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Mode frequency at the degenerate point omega^2 = 3 where the first-order
/// friction shift is singular.
class degenerate_mode_error : public std::domain_error {
public:
    explicit degenerate_mode_error(const std::string& what) : std::domain_error(what) {}
};

/// omega = 0 has no normalizable eigenvector.
class singular_mode_error : public std::domain_error {
public:
    explicit singular_mode_error(const std::string& what) : std::domain_error(what) {}
};

/// Malformed or incomplete configuration file.
class config_parse_error : public std::runtime_error {
public:
    explicit config_parse_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spintrap
