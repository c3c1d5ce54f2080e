#pragma once

#include <stdexcept>
#include <string>

namespace thermal_designs {

// Every error raised by the library derives from Error. The CLI maps the
// concrete kinds onto stable exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad dimensions, locality, temperatures, malformed configs or files.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

// A dense D^t object would exceed the configured memory cap.
class CapacityError : public Error {
  public:
    CapacityError(const std::string& what, long long base_dim, int t)
        : Error(what), base_dim_(base_dim), t_(t) {}

    long long base_dim() const { return base_dim_; }
    int t() const { return t_; }

  private:
    long long base_dim_;
    int t_;
};

// Eigensolver non-convergence, overflow, unreachable thresholds.
class NumericFailure : public Error {
  public:
    using Error::Error;
};

}  // namespace thermal_designs
