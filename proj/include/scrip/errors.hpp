#pragma once

#include <stdexcept>
#include <string>

namespace scrip {

// Base for all domain errors. name() is the stable identifier echoed by the
// CLI; what() carries the human-readable detail.
class ScripError : public std::runtime_error {
 public:
  ScripError(std::string name, const std::string& msg)
      : std::runtime_error(msg), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define SCRIP_DEFINE_ERROR(ClassName)                         \
  class ClassName : public ScripError {                       \
   public:                                                    \
    explicit ClassName(const std::string& msg)                \
        : ScripError(#ClassName, msg) {}                      \
  }

SCRIP_DEFINE_ERROR(FractionSumError);
SCRIP_DEFINE_ERROR(ParameterRangeError);
SCRIP_DEFINE_ERROR(NotPayoffHeterogeneous);
SCRIP_DEFINE_ERROR(DivergentMean);
SCRIP_DEFINE_ERROR(Infeasible);
SCRIP_DEFINE_ERROR(NonConvergence);
SCRIP_DEFINE_ERROR(ThresholdUnbounded);
SCRIP_DEFINE_ERROR(MonotonicityViolation);
SCRIP_DEFINE_ERROR(NegativeMass);
SCRIP_DEFINE_ERROR(NoExplanation);
SCRIP_DEFINE_ERROR(NoSolution);
SCRIP_DEFINE_ERROR(StateSpaceTooLarge);
SCRIP_DEFINE_ERROR(ConfigError);

#undef SCRIP_DEFINE_ERROR

}  // namespace scrip
