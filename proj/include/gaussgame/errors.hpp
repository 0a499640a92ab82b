#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gaussgame {

// Short numeric rendering for error messages.
inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Violated input contract. The CLI maps this family to exit code 3.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// (lambda, mu) outside the Borell region lambda + mu >= 1, |lambda - mu| <= 1.
class AdmissibilityError : public PreconditionError {
 public:
  AdmissibilityError(const std::string& condition, double lambda, double mu)
      : PreconditionError("inadmissible coefficients (lambda=" + fmt_num(lambda) + ", mu=" + fmt_num(mu) +
                          "): violates " + condition),
        condition_(condition) {}

  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

class FrameError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class RangeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// A control whose conjugate cost R(beta) is infinite.
class RejectedControl : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Strategy output changed under a replay that only altered future opponent controls.
class CausalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaussgame
