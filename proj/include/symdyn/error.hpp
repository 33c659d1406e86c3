#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symdyn {

enum class ErrorKind {
  DuplicateSymbol,
  UnknownSymbol,
  StrandedSymbol,
  NotIrreducible,
  TrivialSymbol,
  InadmissibleWord,
  BadAnchor,
  WordMismatch,
  StemMismatch,
  BaseMismatch,
  NoConvergence,
  PartitionInvalid,
  SegmentMismatch,
  InvalidArgument,
  InputError,
  CapacityExceeded,
};

std::string_view to_string(ErrorKind kind);

// Single exception type; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace symdyn
