#pragma once

#include <stdexcept>
#include <string>

namespace hitchin {

// Errors split into two families: bad input (validation) and a numerical
// procedure that could not meet its tolerance. The CLI maps them to exit
// codes 3 and 4.
enum class ErrorKind { Validation, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& name, const std::string& what)
      : std::runtime_error(name + ": " + what), kind_(kind), name_(name) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ErrorKind kind_;
  std::string name_;
};

#define HITCHIN_DEFINE_ERROR(Name, Kind)                  \
  class Name : public Error {                             \
   public:                                                \
    explicit Name(const std::string& what)                \
        : Error(ErrorKind::Kind, #Name, what) {}          \
  };

// curve
HITCHIN_DEFINE_ERROR(DegreeError, Validation)
HITCHIN_DEFINE_ERROR(DuplicateBranchPoint, Validation)
HITCHIN_DEFINE_ERROR(BranchProximity, Numerical)
HITCHIN_DEFINE_ERROR(ContinuationAmbiguity, Numerical)
HITCHIN_DEFINE_ERROR(CycleDegenerate, Numerical)
HITCHIN_DEFINE_ERROR(PathSheetMismatch, Numerical)

// spectral / sov / angleflow
HITCHIN_DEFINE_ERROR(RankError, Validation)
HITCHIN_DEFINE_ERROR(ConfigurationError, Validation)
HITCHIN_DEFINE_ERROR(SingularConfiguration, Numerical)
HITCHIN_DEFINE_ERROR(NewtonDivergence, Numerical)
HITCHIN_DEFINE_ERROR(SingularJacobian, Numerical)
HITCHIN_DEFINE_ERROR(BranchLocus, Numerical)
HITCHIN_DEFINE_ERROR(IllConditioned, Numerical)
HITCHIN_DEFINE_ERROR(StepRejected, Numerical)
HITCHIN_DEFINE_ERROR(BranchCollision, Numerical)

// theta
HITCHIN_DEFINE_ERROR(TruncationOverflow, Numerical)
HITCHIN_DEFINE_ERROR(ThetaDivisor, Numerical)
HITCHIN_DEFINE_ERROR(ResidueUnstable, Numerical)

// sl2
HITCHIN_DEFINE_ERROR(DegenerateLine, Validation)
HITCHIN_DEFINE_ERROR(PoleCollision, Validation)
HITCHIN_DEFINE_ERROR(ChartSingularity, Numerical)

// parabolic
HITCHIN_DEFINE_ERROR(IndexError, Validation)
HITCHIN_DEFINE_ERROR(TypeError, Validation)
HITCHIN_DEFINE_ERROR(IndeterminateDimension, Validation)
HITCHIN_DEFINE_ERROR(TruncationInsufficient, Validation)
HITCHIN_DEFINE_ERROR(NotIntegral, Validation)
HITCHIN_DEFINE_ERROR(IOError, Validation)

#undef HITCHIN_DEFINE_ERROR

}  // namespace hitchin
