#pragma once

#include <stdexcept>
#include <string>

namespace catbrw {

// Broad failure classes; the command-line driver maps each to its own exit status.
enum class ErrorKind { Input, Config, Calibration, Numerical, Dependency };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define CATBRW_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

CATBRW_DEFINE_ERROR(InputError, Input)
CATBRW_DEFINE_ERROR(UnsupportedDimensionError, Input)
CATBRW_DEFINE_ERROR(GridCoverageError, Input)
CATBRW_DEFINE_ERROR(DerivativeOrderError, Input)
CATBRW_DEFINE_ERROR(ConfigError, Config)
CATBRW_DEFINE_ERROR(CalibrationError, Calibration)
CATBRW_DEFINE_ERROR(CriticalityError, Calibration)
CATBRW_DEFINE_ERROR(NoSolutionError, Calibration)
CATBRW_DEFINE_ERROR(QuadratureResolutionError, Numerical)
CATBRW_DEFINE_ERROR(NonConvergenceError, Numerical)
CATBRW_DEFINE_ERROR(TabulationQualityError, Numerical)
CATBRW_DEFINE_ERROR(InstabilityError, Numerical)
CATBRW_DEFINE_ERROR(ConsistencyError, Numerical)
CATBRW_DEFINE_ERROR(InsufficientSurvivorsError, Numerical)
CATBRW_DEFINE_ERROR(DependencyError, Dependency)
CATBRW_DEFINE_ERROR(IntegrityError, Dependency)

#undef CATBRW_DEFINE_ERROR

}  // namespace catbrw
