#pragma once

#include <stdexcept>
#include <string>

namespace mtlab {

// Failure categories surfaced by the library. Each maps 1:1 to a documented
// error condition of some operation; tests match on the code, not the text.
enum class errc {
  out_of_domain,
  near_zero_warp,
  wrong_topology,
  non_finite_integrand,
  degenerate_grid,
  curvature_too_large,
  non_positive,
  negative_radicand,
  eps_too_large,
  step_underflow,
  out_of_regime,
  truncation_too_short,
  no_convergence,
  constant_function,
  no_variation,
  disk_too_small,
  infinite_volume,
  precondition_violated,
  not_monotone,
  overflow,
  constraint_violated,
  insufficient_range,
  bad_parameter,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::out_of_domain: return "OutOfDomain";
    case errc::near_zero_warp: return "NearZeroWarp";
    case errc::wrong_topology: return "WrongTopology";
    case errc::non_finite_integrand: return "NonFiniteIntegrand";
    case errc::degenerate_grid: return "DegenerateGrid";
    case errc::curvature_too_large: return "CurvatureTooLarge";
    case errc::non_positive: return "NonPositive";
    case errc::negative_radicand: return "NegativeRadicand";
    case errc::eps_too_large: return "EpsTooLarge";
    case errc::step_underflow: return "StepUnderflow";
    case errc::out_of_regime: return "OutOfRegime";
    case errc::truncation_too_short: return "TruncationTooShort";
    case errc::no_convergence: return "NoConvergence";
    case errc::constant_function: return "ConstantFunction";
    case errc::no_variation: return "NoVariation";
    case errc::disk_too_small: return "DiskTooSmall";
    case errc::infinite_volume: return "InfiniteVolume";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::not_monotone: return "NotMonotone";
    case errc::overflow: return "Overflow";
    case errc::constraint_violated: return "ConstraintViolated";
    case errc::insufficient_range: return "InsufficientRange";
    case errc::bad_parameter: return "BadParameter";
  }
  return "Unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace mtlab
