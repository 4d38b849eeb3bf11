#ifndef BERTRAND_COMMON_HPP
#define BERTRAND_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bertrand {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy. Everything thrown by the library derives from Error so
// callers (the CLI in particular) can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Price outside the range of a strategy.
struct RangeError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// Wrong combination of arguments (mode vs. shape, bad option values).
struct UsageError : Error {
  using Error::Error;
};

struct SingularPriorError : Error {
  using Error::Error;
};

struct EmptySetError : Error {
  using Error::Error;
};

// A parameter vector violates one or more constraints g_i >= 0.
struct ConstraintViolation : Error {
  ConstraintViolation(const std::string& what, std::vector<int> violated)
      : Error(what), violated_constraints(std::move(violated)) {}
  std::vector<int> violated_constraints;
};

struct NoCertificateError : Error {
  using Error::Error;
};

struct GridTooCoarseError : Error {
  using Error::Error;
};

struct SearchFailureError : Error {
  using Error::Error;
};

}  // namespace bertrand

#endif  // BERTRAND_COMMON_HPP
