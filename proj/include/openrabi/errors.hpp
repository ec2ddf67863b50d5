#pragma once

// Error taxonomy for the openrabi library.
//
// Every failure mode surfaced by the library derives from openrabi::Error so
// callers can catch the whole family at once; the concrete type names the
// failure mode precisely.  Construction-time validation failures use
// InvalidParams; numerical failures carry enough context (bracket, residual,
// iteration count, ...) in the message to reproduce the call.

#include <stdexcept>
#include <string>

namespace openrabi {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

namespace detail {
inline std::string tag(const char* name, const std::string& msg) {
  return std::string(name) + ": " + msg;
}
}  // namespace detail

#define OPENRABI_ERROR_TYPE(NAME)                                     \
  class NAME : public Error {                                         \
  public:                                                             \
    explicit NAME(const std::string& msg)                             \
        : Error(detail::tag(#NAME, msg)) {}                           \
  };

// Parameter / input validation.
OPENRABI_ERROR_TYPE(InvalidParams)

// Mean-field solver family.
OPENRABI_ERROR_TYPE(NoConvergence)        // root polish exceeded iteration cap
OPENRABI_ERROR_TYPE(SingularElimination)  // |s_z| too small for spin elimination
OPENRABI_ERROR_TYPE(DivergentCritical)    // g_c undefined at mu = 1
OPENRABI_ERROR_TYPE(OutsideInvertedRegime)
OPENRABI_ERROR_TYPE(DegenerateDenominator)
OPENRABI_ERROR_TYPE(NoCoexistence)        // no first-order window in g range

// Fock-space operator family.
OPENRABI_ERROR_TYPE(CutoffLimit)          // requested cutoff exceeds hard max

// Lindblad / steady-state family.
OPENRABI_ERROR_TYPE(ShapeMismatch)
OPENRABI_ERROR_TYPE(SingularSystem)
OPENRABI_ERROR_TYPE(ResidualTooLarge)
OPENRABI_ERROR_TYPE(GridTooNarrow)        // Wigner grid misses significant mass

// Branch-decomposition family.
OPENRABI_ERROR_TYPE(DegenerateWeight)     // branch weight below resolvable floor
OPENRABI_ERROR_TYPE(ZeroDenominator)      // weight-ratio formula undefined

// Langevin / effective-potential family.
OPENRABI_ERROR_TYPE(DegenerateMu)         // effective-potential scale undefined at mu = 1
OPENRABI_ERROR_TYPE(NormalizationOverflow)
OPENRABI_ERROR_TYPE(UnsupportedMoment)
OPENRABI_ERROR_TYPE(RegimeViolation)
OPENRABI_ERROR_TYPE(Unstable)             // trajectory escaped beyond hard bound

// Scaling / fitting family.
OPENRABI_ERROR_TYPE(NoBracket)
OPENRABI_ERROR_TYPE(NonPositiveData)
OPENRABI_ERROR_TYPE(InsufficientData)

// I/O family.
OPENRABI_ERROR_TYPE(IoFailure)

#undef OPENRABI_ERROR_TYPE

}  // namespace openrabi
