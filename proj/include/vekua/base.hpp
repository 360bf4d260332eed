#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace vekua {

inline constexpr const char* version = "0.1.0";

using cplx = std::complex<double>;

/// Malformed group, operator, or solver configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Text that does not parse; `position` is the 0-based character offset.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, const std::string& what)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

/// Right-hand side incompatible with the kernel of a singular mode.
class AdmissibilityError : public std::runtime_error {
public:
    AdmissibilityError(const std::string& what, std::vector<std::string> modes)
        : std::runtime_error(what), modes(std::move(modes)) {}
    std::vector<std::string> modes;
};

/// A solve was requested under failing hypotheses or vanishing denominators.
class HypothesisError : public std::runtime_error {
public:
    HypothesisError(const std::string& what, std::vector<std::string> modes = {})
        : std::runtime_error(what), modes(std::move(modes)) {}
    std::vector<std::string> modes;
};

} // namespace vekua
