#ifndef ASSIST_ERRORS_H_
#define ASSIST_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace assist {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  // core
  kEmptyIntersection,
  kMissingId,
  kUnknownColumn,
  kOverlappingGroups,
  kDuplicateId,
  // learners
  kNonFiniteLoss,
  // protocol
  kCollationFailure,
  kAssistantRefused,
  kStorageConflict,
  kUnknownRound,
  kMissingTestRows,
  kShapeMismatch,
  // transport
  kNonFinitePayload,
  kMalformedMessage,
  kUnsupportedVersion,
  kBindFailure,
  kTimeout,
  kConnectionRefused,
  kTransportError,
  // data
  kMissingColumn,
  kNonNumericCell,
  // harness
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

// Inverse of error_code_name; unknown names map to kTransportError so that a
// peer speaking a newer vocabulary still surfaces as a transport problem.
ErrorCode error_code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Transport failures form their own family so the CLI can map them to a
// distinct exit status.
inline bool is_transport_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBindFailure:
    case ErrorCode::kTimeout:
    case ErrorCode::kConnectionRefused:
    case ErrorCode::kTransportError:
    case ErrorCode::kMalformedMessage:
    case ErrorCode::kUnsupportedVersion:
      return true;
    default:
      return false;
  }
}

}  // namespace assist

#endif  // ASSIST_ERRORS_H_
