// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/findings.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::findings {

using nlohmann::json;

namespace {

std::optional<int> parse_positive(std::string_view digits) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || value <= 0)
    return std::nullopt;
  return value;
}

bool iequals_prefix(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size())
    return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(text[i])) != prefix[i])
      return false;
  return true;
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{} is not valid JSON: {}", what, e.what()));
  }
}

const json* member(const json& object, std::string_view key) {
  if (!object.is_object())
    return nullptr;
  auto it = object.find(key);
  return it == object.end() || it->is_null() ? nullptr : &*it;
}

std::string string_member(const json& object, std::string_view key) {
  const json* v = member(object, key);
  return v && v->is_string() ? v->get<std::string>() : std::string();
}

std::optional<int> int_member(const json& object, std::string_view key) {
  const json* v = member(object, key);
  if (v == nullptr)
    return std::nullopt;
  if (v->is_number_integer())
    return v->get<long long>() > 0 ? std::optional<int>(static_cast<int>(v->get<long long>())) : std::nullopt;
  if (v->is_string())
    return parse_positive(v->get_ref<const std::string&>());
  return std::nullopt;
}

std::optional<std::size_t> index_member(const json& object, std::string_view key) {
  const json* v = member(object, key);
  if (v == nullptr || !v->is_number_integer() || v->get<long long>() < 0)
    return std::nullopt;
  return static_cast<std::size_t>(v->get<long long>());
}

/// First CWE found in a SARIF property bag: "cwe" (string, number or list),
/// then tags.
std::optional<int> cwe_from_properties(const json& holder) {
  const json* props = member(holder, "properties");
  if (props == nullptr)
    return std::nullopt;
  if (const json* cwe = member(*props, "cwe")) {
    if (cwe->is_number_integer() && cwe->get<long long>() > 0)
      return static_cast<int>(cwe->get<long long>());
    if (cwe->is_string())
      if (auto id = parse_cwe_reference(cwe->get_ref<const std::string&>()))
        return id;
    if (cwe->is_array())
      for (const auto& c : *cwe)
        if (c.is_string())
          if (auto id = parse_cwe_reference(c.get_ref<const std::string&>()))
            return id;
  }
  if (const json* tags = member(*props, "tags"); tags && tags->is_array()) {
    for (const auto& t : *tags) {
      if (!t.is_string())
        continue;
      const auto& s = t.get_ref<const std::string&>();
      if (iequals_prefix(s, "external/cwe/") || iequals_prefix(s, "cwe-"))
        if (auto id = parse_cwe_reference(s))
          return id;
    }
  }
  return std::nullopt;
}

struct RuleInfo {
  std::string id;
  std::optional<int> cwe;
};

std::vector<RuleInfo> collect_rules(const json* component) {
  std::vector<RuleInfo> out;
  if (component == nullptr)
    return out;
  const json* rules = member(*component, "rules");
  if (rules == nullptr || !rules->is_array())
    return out;
  for (const auto& r : *rules)
    out.push_back({string_member(r, "id"), cwe_from_properties(r)});
  return out;
}

} // namespace

std::string_view to_string(Tool tool) {
  switch (tool) {
  case Tool::CodeQL: return "CODEQL";
  case Tool::Joern: return "JOERN";
  case Tool::McpScanner: return "MCP_SCANNER";
  }
  return "";
}

Tool tool_from_string(std::string_view text) {
  if (text == "CODEQL")
    return Tool::CodeQL;
  if (text == "JOERN")
    return Tool::Joern;
  if (text == "MCP_SCANNER")
    return Tool::McpScanner;
  throw ParseError(fmt::format("unknown tool '{}'", text));
}

std::optional<std::string> normalize_path(std::string_view uri) {
  if (iequals_prefix(uri, "file://"))
    uri.remove_prefix(7);
  else if (iequals_prefix(uri, "file:"))
    uri.remove_prefix(5);
  std::string p(uri);
  std::replace(p.begin(), p.end(), '\\', '/');
  std::vector<std::string_view> parts;
  std::string_view rest(p);
  while (!rest.empty()) {
    auto slash = rest.find('/');
    auto seg = rest.substr(0, slash);
    if (seg == "..") {
      if (parts.empty())
        return std::nullopt;
      parts.pop_back();
    } else if (!seg.empty() && seg != ".") {
      parts.push_back(seg);
    }
    if (slash == rest.npos)
      break;
    rest.remove_prefix(slash + 1);
  }
  if (parts.empty())
    return std::nullopt;
  std::string out;
  for (auto seg : parts) {
    if (!out.empty())
      out.push_back('/');
    out += seg;
  }
  return out;
}

std::optional<int> parse_cwe_reference(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (iequals_prefix(text, "external/cwe/"))
    text.remove_prefix(13);
  if (iequals_prefix(text, "cwe-"))
    text.remove_prefix(4);
  else if (iequals_prefix(text, "cwe"))
    text.remove_prefix(3);
  return parse_positive(text);
}

ParsedFindings parse_sarif(std::string_view document, const std::string& repo_id) {
  const json doc = parse_json(document, "SARIF document");
  const json* runs = member(doc, "runs");
  if (runs == nullptr || !runs->is_array())
    throw ParseError("not a SARIF log: missing 'runs' array");
  if (const json* v = member(doc, "version"); v && (!v->is_string() || !v->get<std::string>().starts_with("2.")))
    throw ParseError("unsupported SARIF version");

  ParsedFindings out;
  for (const auto& run : *runs) {
    const json* tool = member(run, "tool");
    const json* driver = tool ? member(*tool, "driver") : nullptr;
    std::vector<RuleInfo> driver_rules = collect_rules(driver);
    std::vector<std::vector<RuleInfo>> extension_rules;
    if (const json* ext = tool ? member(*tool, "extensions") : nullptr; ext && ext->is_array())
      for (const auto& e : *ext)
        extension_rules.push_back(collect_rules(&e));

    std::map<std::string, std::optional<int>> by_id;
    for (const auto& r : driver_rules)
      by_id.emplace(r.id, r.cwe);
    for (const auto& rules : extension_rules)
      for (const auto& r : rules)
        by_id.emplace(r.id, r.cwe);

    std::vector<std::string> artifacts;
    if (const json* a = member(run, "artifacts"); a && a->is_array())
      for (const auto& art : *a)
        artifacts.push_back(member(art, "location") ? string_member(art["location"], "uri") : "");

    const json* results = member(run, "results");
    if (results == nullptr || !results->is_array())
      continue;
    for (const auto& result : *results) {
      // Rule lookup: explicit descriptor reference first, then ruleId.
      const RuleInfo* rule = nullptr;
      std::string rule_id = string_member(result, "ruleId");
      const json* desc = member(result, "rule");
      std::optional<std::size_t> index = index_member(result, "ruleIndex");
      std::optional<std::size_t> component;
      if (desc) {
        if (rule_id.empty())
          rule_id = string_member(*desc, "id");
        if (auto i = index_member(*desc, "index"))
          index = i;
        if (const json* tc = member(*desc, "toolComponent"))
          component = index_member(*tc, "index");
      }
      const auto& rules = component && *component < extension_rules.size() ? extension_rules[*component]
                                                                            : driver_rules;
      if (index && *index < rules.size())
        rule = &rules[*index];
      if (rule && rule_id.empty())
        rule_id = rule->id;

      std::optional<int> cwe = cwe_from_properties(result);
      if (!cwe && rule)
        cwe = rule->cwe;
      if (!cwe) {
        auto it = by_id.find(rule_id);
        if (it != by_id.end())
          cwe = it->second;
      }

      const json* locations = member(result, "locations");
      const json* physical = nullptr;
      if (locations && locations->is_array() && !locations->empty())
        physical = member((*locations)[0], "physicalLocation");
      if (physical == nullptr)
        continue;
      std::string uri;
      if (const json* art = member(*physical, "artifactLocation")) {
        uri = string_member(*art, "uri");
        auto ai = index_member(*art, "index");
        if (uri.empty() && ai && *ai < artifacts.size())
          uri = artifacts[*ai];
      }
      auto path = normalize_path(uri);
      if (!path)
        continue;

      RawFinding f;
      f.repo_id = repo_id;
      f.tool = Tool::CodeQL;
      f.rule_id = rule_id;
      f.cwe_id = cwe;
      f.file_path = std::move(*path);
      if (const json* region = member(*physical, "region")) {
        f.start_line = int_member(*region, "startLine").value_or(1);
        f.end_line = std::max(f.start_line, int_member(*region, "endLine").value_or(f.start_line));
      }
      if (const json* msg = member(result, "message"))
        f.message = string_member(*msg, "text");
      if (!f.cwe_id)
        ++out.skipped;
      out.findings.push_back(std::move(f));
    }
  }
  return out;
}

CweLookup parse_cwe_lookup(std::string_view text, std::string_view what) {
  auto t = table::parse(text);
  CweLookup out;
  if (t.header.size() < 2)
    throw ParseError(fmt::format("{}: expected two columns (key, cwe_id)", what));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row[0].empty())
      throw ParseError(fmt::format("{}: row {} has an empty key", what, r + 2));
    auto cwe = parse_cwe_reference(row[1]);
    if (!cwe)
      throw ParseError(fmt::format("{}: row {} has invalid CWE '{}'", what, r + 2, row[1]));
    auto [it, inserted] = out.emplace(row[0], *cwe);
    if (!inserted && it->second != *cwe)
      throw Error(ErrorKind::Config,
                  fmt::format("{}: '{}' maps to both CWE-{} and CWE-{}", what, row[0], it->second, *cwe));
  }
  return out;
}

ParsedFindings parse_joern_results(std::string_view document, const CweLookup& manifest,
                                   const std::string& repo_id) {
  ParsedFindings out;
  std::size_t line_no = 0;
  while (!document.empty()) {
    ++line_no;
    auto nl = document.find('\n');
    std::string_view line = document.substr(0, nl);
    document.remove_prefix(nl == document.npos ? document.size() : nl + 1);
    if (line.find_first_not_of(" \t\r") == line.npos)
      continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError(fmt::format("Joern results: malformed record on line {}", line_no), line_no, 1);
    }
    const json* q = member(rec, "query_id");
    const json* file = member(rec, "filename");
    if (q == nullptr || !q->is_string() || file == nullptr || !file->is_string())
      throw ParseError(fmt::format("Joern results: line {} lacks query_id or filename", line_no), line_no, 1);
    const json* ln = member(rec, "line_number");
    auto line_number = int_member(rec, "line_number");
    if (ln != nullptr && !line_number)
      throw ParseError(fmt::format("Joern results: line {} has an invalid line_number", line_no), line_no, 1);

    auto it = manifest.find(q->get<std::string>());
    if (it == manifest.end()) {
      ++out.skipped;
      continue;
    }
    auto path = normalize_path(file->get<std::string>());
    if (!path)
      throw ParseError(fmt::format("Joern results: line {} has an unusable filename", line_no), line_no, 1);
    RawFinding f;
    f.repo_id = repo_id;
    f.tool = Tool::Joern;
    f.rule_id = it->first;
    f.cwe_id = it->second;
    f.file_path = std::move(*path);
    f.start_line = f.end_line = line_number.value_or(1);
    f.message = string_member(rec, "snippet");
    out.findings.push_back(std::move(f));
  }
  return out;
}

ParsedFindings parse_scanner_output(std::string_view document, const CweLookup& category_map,
                                    const std::string& repo_id) {
  const json doc = parse_json(document, "scanner report");
  const json* entries = doc.is_array() ? &doc : member(doc, "findings");
  if (entries == nullptr || !entries->is_array())
    throw ParseError("scanner report: expected a 'findings' array");
  ParsedFindings out;
  std::size_t n = 0;
  for (const auto& e : *entries) {
    ++n;
    const json* category = member(e, "category");
    const json* file = member(e, "file");
    if (category == nullptr || !category->is_string() || file == nullptr || !file->is_string())
      throw ParseError(fmt::format("scanner report: entry {} lacks category or file", n));
    auto it = category_map.find(category->get<std::string>());
    if (it == category_map.end()) {
      ++out.skipped;
      continue;
    }
    auto path = normalize_path(file->get<std::string>());
    if (!path)
      throw ParseError(fmt::format("scanner report: entry {} has an unusable file", n));
    RawFinding f;
    f.repo_id = repo_id;
    f.tool = Tool::McpScanner;
    f.rule_id = it->first;
    f.cwe_id = it->second;
    f.file_path = std::move(*path);
    f.start_line = f.end_line = int_member(e, "line").value_or(1);
    f.message = string_member(e, "detail");
    out.findings.push_back(std::move(f));
  }
  return out;
}

} // namespace mcprisk::findings
