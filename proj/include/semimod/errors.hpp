#pragma once

#include <stdexcept>
#include <string>

namespace semimod {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error("shape mismatch: " + msg) {}
};

struct NotHermitian : Error {
  explicit NotHermitian(const std::string& msg) : Error("not Hermitian: " + msg) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error("no convergence: " + msg) {}
};

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& msg) : Error("empty input: " + msg) {}
};

struct NotCp : Error {
  explicit NotCp(const std::string& msg) : Error("not completely positive: " + msg) {}
};

struct NotUnital : Error {
  explicit NotUnital(const std::string& msg) : Error("not unital: " + msg) {}
};

struct NotSemiPhi : Error {
  explicit NotSemiPhi(const std::string& msg) : Error("not a completely semi-phi map: " + msg) {}
};

struct NotRepresentation : Error {
  explicit NotRepresentation(const std::string& msg) : Error("not a representation: " + msg) {}
};

struct ProjectionLeak : Error {
  explicit ProjectionLeak(const std::string& msg) : Error("corner projection leak: " + msg) {}
};

struct InvariantViolation : Error {
  explicit InvariantViolation(const std::string& msg) : Error("invariant violation: " + msg) {}
};

struct NotEquivalent : Error {
  explicit NotEquivalent(const std::string& msg) : Error("dilation pairs not equivalent: " + msg) {}
};

struct NotInCommutant : Error {
  explicit NotInCommutant(const std::string& msg) : Error("not in the commutant: " + msg) {}
};

struct NotPositive : Error {
  explicit NotPositive(const std::string& msg) : Error("not positive: " + msg) {}
};

struct OrderFails : Error {
  explicit OrderFails(const std::string& msg) : Error("order relation fails: " + msg) {}
};

struct IllConditioned : Error {
  explicit IllConditioned(const std::string& msg) : Error("ill conditioned: " + msg) {}
};

struct UnsupportedDims : Error {
  explicit UnsupportedDims(const std::string& msg) : Error("unsupported dimensions: " + msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

}  // namespace semimod
