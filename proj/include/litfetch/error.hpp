#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace litfetch {

enum class ErrorKind {
  kMalformedDoi,
  kMalformedIssn,
  kIssnChecksumFailed,
  kInvalidDateRange,
  kInvalidKeyword,
  kInvalidQuery,
  kNetworkError,
  kRateLimited,
  kUpstreamError,
  kUnknownJournal,
  kWorkNotFound,
  kMalformedResponse,
  kContentTypeUnavailable,
  kInvalidRecord,
  kParseError,
  kInconsistentCounts,
  kStorageError,
};

std::string_view error_kind_name(ErrorKind kind);

// Single exception type for the library. The kind identifies the failure;
// the optional fields carry whatever context the throwing site knows.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message);

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

  // The offending input token (DOI, ISSN, flag value).
  const std::optional<std::string>& token() const noexcept { return token_; }
  // Position of the token within a list, or the 1-based line of a parse error.
  const std::optional<std::size_t>& position() const noexcept {
    return position_;
  }
  // The journal ISSN or seed DOI being processed when the error happened.
  const std::optional<std::string>& origin() const noexcept { return origin_; }
  const std::optional<std::size_t>& page() const noexcept { return page_; }
  const std::optional<int>& http_status() const noexcept { return status_; }

  Error& with_token(std::string token) {
    token_ = std::move(token);
    return *this;
  }
  Error& with_position(std::size_t position) {
    position_ = position;
    return *this;
  }
  Error& with_origin(std::string origin) {
    origin_ = std::move(origin);
    return *this;
  }
  Error& with_page(std::size_t page) {
    page_ = page;
    return *this;
  }
  Error& with_status(int status) {
    status_ = status;
    return *this;
  }

 private:
  ErrorKind kind_;
  std::string message_;
  std::optional<std::string> token_;
  std::optional<std::size_t> position_;
  std::optional<std::string> origin_;
  std::optional<std::size_t> page_;
  std::optional<int> status_;
};

}  // namespace litfetch
