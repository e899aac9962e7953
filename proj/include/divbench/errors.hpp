#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace divbench {

enum class ErrorCode {
  // input validation
  BadInput,
  SchemaError,
  MismatchedPair,
  SizeMismatch,
  NonFinite,
  NotNormalized,
  MissingImage,
  ZeroNormRow,
  InvalidKernel,
  NotPSD,
  EmptyInput,
  OutOfRange,
  InsufficientData,
  ConstantInput,
  AllZero,
  OneClassOnly,
  GridMismatch,
  SizeTooLarge,
  JoinFailure,
  UnknownSubsetTag,
  BadSpec,
  // filesystem / network
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Whether the failure stems from the environment (files, sockets) rather
/// than from the content of the inputs. The CLI maps this to its exit code.
bool is_io_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace divbench
