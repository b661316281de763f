#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace syncap {

enum class ErrorCode {
  InvalidArgument,
  // geometry
  DegenerateProjection,
  InsufficientCameras,
  NoDetections,
  TriangulationDegenerate,
  NoObservations,
  NonFiniteResidual,
  EmptyEvaluation,
  // sync
  EmptyMatrix,
  NoClients,
  InvalidFrequency,
  MissingPlan,
  MissingOffset,
  // relay
  UnknownSession,
  SessionNotOpen,
  NotHost,
  UnknownClient,
  // data plane
  PayloadTooLarge,
  ChecksumMismatch,
  TruncatedInput,
  BadMagic,
  DuplicateTrigger,
  IoFailure,
  ConnectionLost,
  // visual hull
  BadDims,
  NoSilhouettes,
  // harness
  ConfigError,
  ConfigMismatch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace syncap
