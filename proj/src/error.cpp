#include "litfetch/error.hpp"

namespace litfetch {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedDoi: return "MalformedDoi";
    case ErrorKind::kMalformedIssn: return "MalformedIssn";
    case ErrorKind::kIssnChecksumFailed: return "IssnChecksumFailed";
    case ErrorKind::kInvalidDateRange: return "InvalidDateRange";
    case ErrorKind::kInvalidKeyword: return "InvalidKeyword";
    case ErrorKind::kInvalidQuery: return "InvalidQuery";
    case ErrorKind::kNetworkError: return "NetworkError";
    case ErrorKind::kRateLimited: return "RateLimited";
    case ErrorKind::kUpstreamError: return "UpstreamError";
    case ErrorKind::kUnknownJournal: return "UnknownJournal";
    case ErrorKind::kWorkNotFound: return "WorkNotFound";
    case ErrorKind::kMalformedResponse: return "MalformedResponse";
    case ErrorKind::kContentTypeUnavailable: return "ContentTypeUnavailable";
    case ErrorKind::kInvalidRecord: return "InvalidRecord";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kInconsistentCounts: return "InconsistentCounts";
    case ErrorKind::kStorageError: return "StorageError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind),
      message_(std::move(message)) {}

}  // namespace litfetch
