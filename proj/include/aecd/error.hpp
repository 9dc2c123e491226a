#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aecd {

enum class ErrorCode {
  EmptySignal,
  AllZeroSignal,
  WindowTooLong,
  ZeroHop,
  ModelLengthMismatch,
  SignalTooShort,
  TooFewIMFs,
  TooFewFrames,
  EmptyInput,
  EmptyDataset,
  DimensionMismatch,
  ConfigMismatch,
  RowNotNormalized,
  UnlabeledData,
  DatasetTooSmall,
  InvalidArgument,
  Io,
  Format,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::AllZeroSignal: return "AllZeroSignal";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::ZeroHop: return "ZeroHop";
    case ErrorCode::ModelLengthMismatch: return "ModelLengthMismatch";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::TooFewIMFs: return "TooFewIMFs";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::RowNotNormalized: return "RowNotNormalized";
    case ErrorCode::UnlabeledData: return "UnlabeledData";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace aecd
