// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcprisk::harvest {

inline constexpr std::string_view kDefaultQuery =
    "mcp server stars:>100 pushed:>2025-01-01 language:Python";
inline constexpr std::string_view kTokenVariable = "MCP_RISK_TOKEN";
inline constexpr std::string_view kDefaultApiBase = "https://api.github.com";

struct RepoMetadata {
  std::string full_name;
  long long stars = 0;
  std::optional<std::string> description;
  std::string url;
  std::string language;
  std::string updated_at;
  std::string snapshot_time;

  friend bool operator==(const RepoMetadata&, const RepoMetadata&) = default;
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers; // lowercase names
  std::string body;
};

class HttpTransport {
public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& url,
                           const std::map<std::string, std::string>& headers) = 0;
};

/// Replays a recording: {"recorded_at": "...", "responses": [{status, headers, body}]}.
/// Responses are served in order regardless of URL; the requested URLs are kept.
class ReplayTransport : public HttpTransport {
public:
  explicit ReplayTransport(std::string_view recording_json);

  HttpResponse get(const std::string& url,
                   const std::map<std::string, std::string>& headers) override;

  const std::vector<std::string>& requested_urls() const { return urls_; }
  const std::string& recorded_at() const { return recorded_at_; }

private:
  std::vector<HttpResponse> responses_;
  std::size_t next_ = 0;
  std::vector<std::string> urls_;
  std::string recorded_at_;
};

/// libcurl-backed live transport.
std::unique_ptr<HttpTransport> make_curl_transport();

struct SearchOptions {
  std::string query{kDefaultQuery};
  int page_limit = 10;
  int per_page = 100;
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  std::string api_base{kDefaultApiBase};
  std::string token;
  std::string snapshot_time;
  /// Injected so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct SearchResult {
  std::vector<RepoMetadata> repositories; // stars descending, then full_name
  std::vector<std::string> warnings;
  int backoffs = 0;
  int pages = 0;
};

/// Follows pagination up to page_limit. 401 -> Error{Auth}; exhausted rate
/// limit -> Error{RateLimit}; unparseable body -> Error{Network}. A failure after
/// at least one good page returns the partial list with a warning.
SearchResult search_repositories(HttpTransport& transport, const SearchOptions& options);

std::string build_search_url(const SearchOptions& options, int page);

// ---------------------------------------------------------------------------

struct ExclusionRule {
  enum class Kind { Pattern, Deny };
  Kind kind = Kind::Pattern;
  std::string pattern; // case-insensitive regex over "full_name description", or exact name for Deny
  std::string reason;
};

/// Delimited text with columns (kind, pattern, reason), kind in {pattern, deny}.
std::vector<ExclusionRule> parse_exclusion_rules(std::string_view text);
const std::vector<ExclusionRule>& default_exclusion_rules();

struct Exclusion {
  std::string full_name;
  std::string pattern;
  std::string reason;
};

struct FilterResult {
  std::vector<RepoMetadata> retained; // input order
  std::vector<Exclusion> excluded;    // sorted by full_name
};

/// First matching rule wins; denylist entries are checked before patterns.
FilterResult filter_repositories(std::span<const RepoMetadata> repositories,
                                 std::span<const ExclusionRule> rules);

struct Snapshot {
  std::string query;
  std::string snapshot_time;
  std::vector<RepoMetadata> repositories;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

std::string render_snapshot(const Snapshot& snapshot);
/// Raises Error{Schema} on anything that is not a complete manifest.
Snapshot parse_snapshot(std::string_view text);
void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);
Snapshot load_snapshot(const std::filesystem::path& path);

} // namespace mcprisk::harvest
