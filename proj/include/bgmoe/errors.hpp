#ifndef BGMOE_ERRORS_HPP
#define BGMOE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bgmoe {

/// Invalid argument values (non-positive responses, bad parameters, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

/// Malformed or inconsistent input data (CSV parsing, missing columns, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure. Carries the last estimate and an error bound when the
/// failing routine can provide them (quadrature non-convergence does).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg,
                            double last_estimate = 0.0,
                            double error_bound = 0.0)
        : std::runtime_error(msg),
          last_estimate_(last_estimate),
          error_bound_(error_bound) {}

    double last_estimate() const { return last_estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double last_estimate_;
    double error_bound_;
};

/// Model fitting failed (all restarts collapsed or diverged).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bgmoe

#endif
