#pragma once

#include <stdexcept>
#include <string>

namespace hmmlab {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NonConvergent,
    ZeroStationaryMass,
    SizeCap,
    SingularProjection,
    ComplexEigenvalues,
    PairingFailure,
    RankDeficient,
    EmptyInput,
    AlphabetMismatch,
    OutOfRange,
    InvalidSpec,
    BudgetExceeded,
    NotSymmetric,
    ZeroLikelihood,
    InsufficientData,
    Io,
    Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace hmmlab
