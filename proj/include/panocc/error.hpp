#pragma once

#include <stdexcept>
#include <string>

namespace panocc {

enum class ErrorCode {
  OutOfRange,
  NoConvergence,
  DegeneratePoint,
  DimMismatch,
  GridMismatch,
  LevelMismatch,
  IndexOutOfRange,
  ShapeMismatch,
  EmptyValidRegion,
  NoSupervisedVoxels,
  UnknownPreset,
  InvalidArgument,
  Io,
  Format,
};

const char* to_string(ErrorCode code);

// Every library failure is reported through this exception. The CLI exits
// with 2 for input problems (Io, Format, UnknownPreset, InvalidArgument and
// the dimension, grid, shape and level mismatches) and 1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyValidRegion: return "EmptyValidRegion";
    case ErrorCode::NoSupervisedVoxels: return "NoSupervisedVoxels";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace panocc
