#pragma once

#include <stdexcept>
#include <string>

namespace rgg {

// Invalid argument value or precondition violation.
class argument_error : public std::invalid_argument {
public:
    explicit argument_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Input configuration is not generic (duplicate position, mark or
// pairwise distance), so nearest-neighbour choices would be ambiguous.
class degenerate_input_error : public std::runtime_error {
public:
    explicit degenerate_input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A configured resource cap (points per replicate, evaluation budget) was hit.
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically meaningless request (zero variance, nonfinite weight, ...).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Adaptive quadrature did not converge within its budget. Carries the
// partial result so callers can decide whether it is still usable.
class integration_error : public std::runtime_error {
public:
    integration_error(const std::string& msg, double partial_value, double partial_error)
        : std::runtime_error(msg), partial_value(partial_value), partial_error(partial_error) {}
    double partial_value;
    double partial_error;
};

} // namespace rgg
