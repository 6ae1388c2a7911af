#pragma once

#include <stdexcept>
#include <string>

namespace longrun {

// Input that fails a documented parameter domain (bad scenario, ν ≥ 0, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Parameters inside the model domain but outside the range where a formula
// or integral is finite (q-bounds, moment bounds, divergent integrals).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Series did not converge, too many flagged paths, non-finite results.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace longrun
