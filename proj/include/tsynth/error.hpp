#pragma once

#include <stdexcept>
#include <string>

namespace tsynth {

// Domain failure classes. Every kind except Io/Parse/Corrupt signals an
// invalid candidate that a search is expected to catch and skip.
enum class ErrKind {
  ShapeMismatch,
  AxisOutOfRange,
  RankOverflow,
  DtypeMismatch,
  ValueError,
  SizeLimit,
  TooLargeToEncode,
  InvalidTensor,
  ParseError,
  IoError,
  CorruptBenchmark,
  DivergenceDetected,
};

const char* err_kind_name(ErrKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, const std::string& msg)
      : std::runtime_error(std::string(err_kind_name(kind)) + ": " + msg),
        kind_(kind) {}

  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

[[noreturn]] inline void fail(ErrKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace tsynth
