#include "error.hpp"

namespace hmmlab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonConvergent: return "NonConvergent";
        case ErrorCode::ZeroStationaryMass: return "ZeroStationaryMass";
        case ErrorCode::SizeCap: return "SizeCap";
        case ErrorCode::SingularProjection: return "SingularProjection";
        case ErrorCode::ComplexEigenvalues: return "ComplexEigenvalues";
        case ErrorCode::PairingFailure: return "PairingFailure";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace hmmlab
