#include "syncap/common/error.hpp"

namespace syncap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::InsufficientCameras: return "InsufficientCameras";
    case ErrorCode::NoDetections: return "NoDetections";
    case ErrorCode::TriangulationDegenerate: return "TriangulationDegenerate";
    case ErrorCode::NoObservations: return "NoObservations";
    case ErrorCode::NonFiniteResidual: return "NonFiniteResidual";
    case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::NoClients: return "NoClients";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::MissingPlan: return "MissingPlan";
    case ErrorCode::MissingOffset: return "MissingOffset";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionNotOpen: return "SessionNotOpen";
    case ErrorCode::NotHost: return "NotHost";
    case ErrorCode::UnknownClient: return "UnknownClient";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::TruncatedInput: return "TruncatedInput";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DuplicateTrigger: return "DuplicateTrigger";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ConnectionLost: return "ConnectionLost";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::NoSilhouettes: return "NoSilhouettes";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace syncap
