#pragma once

#include <stdexcept>
#include <string>

namespace fid {

enum class ErrorCode {
  // diagram validation
  CycleDetected,
  TopMissing,
  TopHasSuccessor,
  ChanceWithLogicalParent,
  NotArityViolation,
  EmptyLogicalParents,
  CptShapeMismatch,
  ProbabilityOutOfRange,
  DuplicateNodeId,
  DuplicateParent,
  DanglingParentRef,
  InvalidNodeId,
  // file format / generator
  SyntaxError,
  InfeasibleParams,
  // queries
  NotAChanceNode,
  AssignmentShapeMismatch,
  UnknownNode,
  // oracle
  TooLargeForOracle,
  // transforms and partition engine
  PreconditionNotMet,
  NoPathToTop,
  NotAChanceBlock,
  ModuleNotReducible,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-checkable code plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fid
