#include "assist/errors.h"

#include <array>
#include <utility>

namespace assist {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 24> kNames{{
    {ErrorCode::kInvalidArgument, "InvalidArgument"},
    {ErrorCode::kDimensionMismatch, "DimensionMismatch"},
    {ErrorCode::kEmptyIntersection, "EmptyIntersection"},
    {ErrorCode::kMissingId, "MissingId"},
    {ErrorCode::kUnknownColumn, "UnknownColumn"},
    {ErrorCode::kOverlappingGroups, "OverlappingGroups"},
    {ErrorCode::kDuplicateId, "DuplicateId"},
    {ErrorCode::kNonFiniteLoss, "NonFiniteLoss"},
    {ErrorCode::kCollationFailure, "CollationFailure"},
    {ErrorCode::kAssistantRefused, "AssistantRefused"},
    {ErrorCode::kStorageConflict, "StorageConflict"},
    {ErrorCode::kUnknownRound, "UnknownRound"},
    {ErrorCode::kMissingTestRows, "MissingTestRows"},
    {ErrorCode::kShapeMismatch, "ShapeMismatch"},
    {ErrorCode::kNonFinitePayload, "NonFinitePayload"},
    {ErrorCode::kMalformedMessage, "MalformedMessage"},
    {ErrorCode::kUnsupportedVersion, "UnsupportedVersion"},
    {ErrorCode::kBindFailure, "BindFailure"},
    {ErrorCode::kTimeout, "Timeout"},
    {ErrorCode::kConnectionRefused, "ConnectionRefused"},
    {ErrorCode::kTransportError, "TransportError"},
    {ErrorCode::kMissingColumn, "MissingColumn"},
    {ErrorCode::kNonNumericCell, "NonNumericCell"},
    {ErrorCode::kConfigError, "ConfigError"},
}};

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

ErrorCode error_code_from_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::kTransportError;
}

}  // namespace assist
