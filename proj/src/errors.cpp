#include "divbench/errors.hpp"

namespace divbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadInput: return "BadInput";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::MismatchedPair: return "MismatchedPair";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::OneClassOnly: return "OneClassOnly";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SizeTooLarge: return "SizeTooLarge";
    case ErrorCode::JoinFailure: return "JoinFailure";
    case ErrorCode::UnknownSubsetTag: return "UnknownSubsetTag";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_io_error(ErrorCode code) { return code == ErrorCode::IoError; }

}  // namespace divbench
