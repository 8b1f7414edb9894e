#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

// Error taxonomy used across the library.  The CLI maps these onto process
// exit codes, so the distinction between "bad input" and "math went wrong"
// matters.

// Invalid user-supplied configuration or parameters (CLI exit code 2).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation outside a function's validity range (CLI exit code 3).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to reach its target (CLI exit code 3).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// An integral that the caller expected to converge did not (CLI exit code 3).
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

// An operation was invoked on inputs that fail its mathematical
// preconditions, e.g. a growth condition that does not hold (exit code 3).
class precondition_error : public std::runtime_error {
public:
    explicit precondition_error(const std::string& what) : std::runtime_error(what) {}
};

// Too few usable data points to produce the requested diagnostic (exit 3).
class insufficient_resolution_error : public std::runtime_error {
public:
    explicit insufficient_resolution_error(const std::string& what) : std::runtime_error(what) {}
};

// The spectral existence gate refused the run: the linear growth rate `a`
// is not below the first Dirichlet eigenvalue of the degenerate core
// (CLI exit code 4).
class existence_gate_error : public std::runtime_error {
public:
    existence_gate_error(const std::string& what, double a, double lambda)
        : std::runtime_error(what), a_(a), lambda_(lambda) {}
    double growth_rate() const { return a_; }
    double eigenvalue() const { return lambda_; }

private:
    double a_;
    double lambda_;
};

} // namespace blowup
