#pragma once

#include <stdexcept>
#include <string>

namespace opg {

/// Error taxonomy shared by all modules. Every throwing operation raises a
/// subclass of Error so callers can catch per-category or wholesale.
enum class ErrorKind {
  Domain,               // argument outside its admissible interval
  Config,               // malformed specification / config document
  DimensionMismatch,    // inconsistent matrix/vector shapes
  DegenerateCubic,      // leading coefficient (numerically) zero
  DegenerateMultiplier, // lambda(s) ~ 0, division unsafe
  Overflow,             // exp/matrix-exponential overflow
  Divergence,           // simulated state left the finite range
  StationarityFailure,  // no root meets the residual contract
  NonConvergence,       // iteration exhausted max_iter
  SingularCurvature,    // f_xx ~ 0 in the Wick right-hand side
  GridMismatch,         // fields/paths on incompatible grids
  BoundaryDecay,        // field does not vanish at the grid edge
  Io,                   // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace opg
