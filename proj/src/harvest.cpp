// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/harvest.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::harvest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
      out.push_back(static_cast<char>(c));
    else if (c == ' ')
      out.push_back('+');
    else
      out += fmt::format("%{:02X}", c);
  }
  return out;
}

std::optional<std::string> header(const HttpResponse& r, std::string_view name) {
  auto it = r.headers.find(std::string(name));
  return it == r.headers.end() ? std::nullopt : std::optional<std::string>(it->second);
}

bool rate_limited(const HttpResponse& r) {
  return r.status == 429 || (r.status == 403 && header(r, "x-ratelimit-remaining") == "0");
}

std::vector<RepoMetadata> parse_page(const std::string& body, const std::string& snapshot_time,
                                     std::optional<long long>* total_count) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Network, fmt::format("malformed search response: {}", e.what()));
  }
  std::vector<RepoMetadata> out;
  try {
    if (doc.contains("total_count") && doc["total_count"].is_number_integer())
      *total_count = doc["total_count"].get<long long>();
    for (const auto& item : doc.at("items")) {
      RepoMetadata m;
      m.full_name = item.at("full_name").get<std::string>();
      m.stars = item.at("stargazers_count").get<long long>();
      if (item.contains("description") && item["description"].is_string())
        m.description = item["description"].get<std::string>();
      m.url = item.at("html_url").get<std::string>();
      m.language = item.contains("language") && item["language"].is_string() ? item["language"].get<std::string>()
                                                                             : std::string();
      m.updated_at = item.at("updated_at").get<std::string>();
      m.snapshot_time = snapshot_time;
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Network, fmt::format("malformed search response: {}", e.what()));
  }
  return out;
}

} // namespace

ReplayTransport::ReplayTransport(std::string_view recording_json) {
  try {
    auto doc = json::parse(recording_json);
    recorded_at_ = doc.value("recorded_at", "");
    for (const auto& r : doc.at("responses")) {
      HttpResponse resp;
      resp.status = r.at("status").get<int>();
      if (r.contains("headers"))
        for (const auto& [k, v] : r["headers"].items())
          resp.headers[lower(k)] = v.is_string() ? v.get<std::string>() : v.dump();
      const auto& body = r.at("body");
      resp.body = body.is_string() ? body.get<std::string>() : body.dump();
      responses_.push_back(std::move(resp));
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("HTTP recording: {}", e.what()));
  }
}

HttpResponse ReplayTransport::get(const std::string& url, const std::map<std::string, std::string>&) {
  urls_.push_back(url);
  if (next_ >= responses_.size())
    throw Error(ErrorKind::Network, fmt::format("recording exhausted at request {}", urls_.size()));
  return responses_[next_++];
}

std::string build_search_url(const SearchOptions& options, int page) {
  return fmt::format("{}/search/repositories?q={}&sort=stars&order=desc&per_page={}&page={}", options.api_base,
                     url_encode(options.query), options.per_page, page);
}

SearchResult search_repositories(HttpTransport& transport, const SearchOptions& options) {
  std::map<std::string, std::string> headers{
      {"Accept", "application/vnd.github+json"},
      {"User-Agent", "mcprisk"},
      {"X-GitHub-Api-Version", "2022-11-28"},
  };
  if (!options.token.empty())
    headers["Authorization"] = "Bearer " + options.token;
  auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  SearchResult result;
  std::set<std::string> seen;
  std::optional<long long> total_count;

  for (int page = 1; page <= options.page_limit; ++page) {
    std::vector<RepoMetadata> items;
    try {
      const std::string url = build_search_url(options, page);
      for (int attempt = 0;; ++attempt) {
        HttpResponse resp = transport.get(url, headers);
        if (resp.status == 200) {
          items = parse_page(resp.body, options.snapshot_time, &total_count);
          break;
        }
        if (resp.status == 401)
          throw Error(ErrorKind::Auth, "search request rejected: bad or missing token");
        const bool retryable = rate_limited(resp) || resp.status >= 500;
        if (resp.status == 403 && !retryable)
          throw Error(ErrorKind::Auth, "search request forbidden");
        if (!retryable)
          throw Error(ErrorKind::Network, fmt::format("search request failed with HTTP {}", resp.status));
        if (attempt >= options.max_retries)
          throw Error(rate_limited(resp) ? ErrorKind::RateLimit : ErrorKind::Network,
                      fmt::format("giving up after {} retries (HTTP {})", attempt, resp.status));
        std::chrono::milliseconds delay = options.initial_backoff * (1LL << attempt);
        if (auto ra = header(resp, "retry-after")) {
          try {
            delay = std::max(delay, std::chrono::milliseconds(std::stoll(*ra) * 1000));
          } catch (const std::exception&) {
          }
        }
        ++result.backoffs;
        sleep(delay);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Auth || result.pages == 0)
        throw;
      result.warnings.push_back(fmt::format("page {}: {}; returning {} repositories from {} pages", page, e.what(),
                                            result.repositories.size(), result.pages));
      break;
    }
    ++result.pages;
    const std::size_t received = items.size();
    for (auto& m : items)
      if (seen.insert(m.full_name).second)
        result.repositories.push_back(std::move(m));
    if (received < static_cast<std::size_t>(options.per_page))
      break;
    if (total_count && static_cast<long long>(page) * options.per_page >= *total_count)
      break;
  }
  std::stable_sort(result.repositories.begin(), result.repositories.end(),
                   [](const RepoMetadata& a, const RepoMetadata& b) {
                     return a.stars != b.stars ? a.stars > b.stars : a.full_name < b.full_name;
                   });
  return result;
}

// ---------------------------------------------------------------------------

std::vector<ExclusionRule> parse_exclusion_rules(std::string_view text) {
  auto t = table::parse(text);
  std::vector<ExclusionRule> out;
  if (t.header.empty())
    return out;
  const auto c_kind = t.column("kind"), c_pat = t.column("pattern"), c_reason = t.column("reason");
  for (const auto& row : t.rows) {
    ExclusionRule r;
    auto kind = lower(row[c_kind]);
    if (kind == "pattern")
      r.kind = ExclusionRule::Kind::Pattern;
    else if (kind == "deny")
      r.kind = ExclusionRule::Kind::Deny;
    else
      throw Error(ErrorKind::Config, fmt::format("exclusion rule kind '{}' (expected pattern or deny)", row[c_kind]));
    r.pattern = row[c_pat];
    r.reason = row[c_reason];
    if (r.pattern.empty())
      throw Error(ErrorKind::Config, "exclusion rule with empty pattern");
    if (r.kind == ExclusionRule::Kind::Pattern) {
      try {
        std::regex(r.pattern, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw Error(ErrorKind::Config, fmt::format("invalid exclusion pattern '{}': {}", r.pattern, e.what()));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

const std::vector<ExclusionRule>& default_exclusion_rules() {
  static const std::vector<ExclusionRule> rules{
      {ExclusionRule::Kind::Pattern, R"(\b(mcp[- _]?client|client[- ]only)\b)", "MCP client-only project"},
      {ExclusionRule::Kind::Pattern, R"(\b(benchmark|bench|eval(uation)?[- ]?(harness|suite|framework)|leaderboard)\b)",
       "benchmark or evaluation harness"},
      {ExclusionRule::Kind::Pattern,
       R"(\b(intentionally|deliberately|damn)[- ]vulnerable\b|\bvulnerable[- ]by[- ]design\b|\bdvmcp\b)",
       "intentionally vulnerable repository"},
  };
  return rules;
}

FilterResult filter_repositories(std::span<const RepoMetadata> repositories, std::span<const ExclusionRule> rules) {
  std::vector<std::pair<const ExclusionRule*, std::regex>> patterns;
  std::map<std::string, const ExclusionRule*> deny;
  for (const auto& r : rules) {
    if (r.kind == ExclusionRule::Kind::Deny)
      deny.emplace(lower(r.pattern), &r);
    else
      patterns.emplace_back(&r, std::regex(r.pattern, std::regex::ECMAScript | std::regex::icase));
  }
  FilterResult out;
  for (const auto& repo : repositories) {
    const ExclusionRule* hit = nullptr;
    if (auto it = deny.find(lower(repo.full_name)); it != deny.end()) {
      hit = it->second;
    } else {
      const std::string text = repo.full_name + " " + repo.description.value_or("");
      for (const auto& [rule, re] : patterns)
        if (std::regex_search(text, re)) {
          hit = rule;
          break;
        }
    }
    if (hit)
      out.excluded.push_back({repo.full_name, hit->pattern, hit->reason});
    else
      out.retained.push_back(repo);
  }
  std::stable_sort(out.excluded.begin(), out.excluded.end(),
                   [](const Exclusion& a, const Exclusion& b) { return a.full_name < b.full_name; });
  return out;
}

// ---------------------------------------------------------------------------

std::string render_snapshot(const Snapshot& s) {
  ordered_json j;
  j["query"] = s.query;
  j["snapshot_time"] = s.snapshot_time;
  auto& repos = j["repositories"] = ordered_json::array();
  for (const auto& r : s.repositories) {
    ordered_json m;
    m["full_name"] = r.full_name;
    m["stars"] = r.stars;
    if (r.description)
      m["description"] = *r.description;
    else
      m["description"] = nullptr;
    m["url"] = r.url;
    m["language"] = r.language;
    m["updated_at"] = r.updated_at;
    m["snapshot_time"] = r.snapshot_time;
    repos.push_back(std::move(m));
  }
  return j.dump(2) + "\n";
}

Snapshot parse_snapshot(std::string_view text) {
  auto schema = [](const std::string& what) { return Error(ErrorKind::Schema, "snapshot manifest: " + what); };
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw schema(fmt::format("not a complete JSON document ({})", e.what()));
  }
  auto str = [&](const json& o, const char* key) {
    if (!o.is_object() || !o.contains(key) || !o[key].is_string())
      throw schema(fmt::format("missing string field '{}'", key));
    return o[key].get<std::string>();
  };
  Snapshot s;
  s.query = str(j, "query");
  s.snapshot_time = str(j, "snapshot_time");
  if (!j.contains("repositories") || !j["repositories"].is_array())
    throw schema("missing 'repositories' array");
  std::set<std::string> names;
  for (const auto& r : j["repositories"]) {
    RepoMetadata m;
    m.full_name = str(r, "full_name");
    if (!r.contains("stars") || !r["stars"].is_number_integer() || r["stars"].get<long long>() < 0)
      throw schema(fmt::format("{}: 'stars' must be a non-negative integer", m.full_name));
    m.stars = r["stars"].get<long long>();
    if (!r.contains("description"))
      throw schema(fmt::format("{}: missing 'description'", m.full_name));
    if (r["description"].is_string())
      m.description = r["description"].get<std::string>();
    else if (!r["description"].is_null())
      throw schema(fmt::format("{}: 'description' must be a string or null", m.full_name));
    m.url = str(r, "url");
    m.language = str(r, "language");
    m.updated_at = str(r, "updated_at");
    m.snapshot_time = str(r, "snapshot_time");
    if (!names.insert(m.full_name).second)
      throw schema(fmt::format("duplicate repository {}", m.full_name));
    s.repositories.push_back(std::move(m));
  }
  return s;
}

void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path) {
  io::write_file(path, render_snapshot(snapshot));
}

Snapshot load_snapshot(const std::filesystem::path& path) { return parse_snapshot(io::read_file(path)); }

} // namespace mcprisk::harvest
