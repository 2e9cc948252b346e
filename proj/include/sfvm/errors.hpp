#ifndef SFVM_ERRORS_HPP_
#define SFVM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sfvm {

// Raised when a coefficient function is queried outside its chart domain.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Incompatible degrees or chart dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A face that had to be spacelike is not (pullback of du omega vanishes or
// changes sign on it).
class NotSpacelikeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base of everything that makes the time stepping stop.
class SchemeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The value handed to a total-flux inversion lies outside the image of the
// flux function. Under the CFL condition this cannot happen, so it always
// indicates a CFL breach or a numerical flux violating the axioms.
class ValueOutsideImage : public SchemeAbort {
 public:
  ValueOutsideImage(const std::string& what, double value, double lo, double hi)
      : SchemeAbort(what), value_(value), lo_(lo), hi_(hi) {}
  double value() const { return value_; }
  double image_lo() const { return lo_; }
  double image_hi() const { return hi_; }

 private:
  double value_, lo_, hi_;
};

class CflViolation : public SchemeAbort {
 public:
  CflViolation(const std::string& what, double lambda_hat)
      : SchemeAbort(what), lambda_hat_(lambda_hat) {}
  double lambda_hat() const { return lambda_hat_; }

 private:
  double lambda_hat_;
};

}  // namespace sfvm

#endif  // SFVM_ERRORS_HPP_
