// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <future>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/findings.hpp"
#include "mcprisk/io.hpp"

namespace mcprisk::findings {

using nlohmann::ordered_json;

DedupMode dedup_mode_from_string(std::string_view text) {
  if (text == "location")
    return DedupMode::Location;
  if (text == "cwe-level")
    return DedupMode::CweLevel;
  throw Error(ErrorKind::Config, fmt::format("unknown dedup mode '{}' (expected location or cwe-level)", text));
}

std::string_view to_string(DedupMode mode) {
  return mode == DedupMode::CweLevel ? "cwe-level" : "location";
}

namespace {

struct RepoAccumulator {
  std::map<int, std::set<std::pair<std::string, int>>> keys; // cwe -> {(file, bucket)}
  std::map<int, std::set<Provenance>> provenance;
  std::set<std::tuple<Tool, std::string, std::string, int, std::string>> unresolved;
};

} // namespace

ProfileMap normalize_and_dedup(std::span<const RawFinding> findings, DedupMode mode) {
  std::map<std::string, RepoAccumulator> acc;
  for (const auto& f : findings) {
    auto& a = acc[f.repo_id];
    if (!f.cwe_id) {
      a.unresolved.emplace(f.tool, f.rule_id, f.file_path, f.start_line, f.message);
      continue;
    }
    if (mode == DedupMode::Location)
      a.keys[*f.cwe_id].emplace(f.file_path, f.start_line / kLineBucket * kLineBucket);
    else
      a.keys[*f.cwe_id].emplace(std::string(), 0);
    a.provenance[*f.cwe_id].insert({f.tool, f.file_path, f.start_line});
  }

  ProfileMap out;
  for (auto& [repo, a] : acc) {
    RepoFindingProfile p;
    p.repo_id = repo;
    for (const auto& [cwe, keys] : a.keys) {
      p.frequencies[cwe] = static_cast<int>(keys.size());
      p.total += static_cast<int>(keys.size());
    }
    for (auto& [cwe, prov] : a.provenance)
      p.provenance[cwe].assign(prov.begin(), prov.end());
    p.skipped = static_cast<int>(a.unresolved.size());
    out.emplace(repo, std::move(p));
  }
  return out;
}

std::string render_profiles_json(const ProfileMap& profiles) {
  ordered_json doc = ordered_json::array();
  for (const auto& [repo, p] : profiles) {
    ordered_json j;
    j["repo_id"] = p.repo_id;
    auto& freq = j["frequencies"] = ordered_json::array();
    for (auto [cwe, count] : p.frequencies)
      freq.push_back({{"cwe", cwe}, {"count", count}});
    j["total"] = p.total;
    j["skipped"] = p.skipped;
    auto& prov = j["provenance"] = ordered_json::array();
    for (const auto& [cwe, list] : p.provenance)
      for (const auto& pv : list)
        prov.push_back({{"cwe", cwe}, {"tool", to_string(pv.tool)}, {"file", pv.file}, {"line", pv.line}});
    doc.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

ProfileMap parse_profiles_json(std::string_view document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(fmt::format("profile document is not valid JSON: {}", e.what()));
  }
  if (!doc.is_array())
    throw ParseError("profile document must be an array");
  ProfileMap out;
  try {
    for (const auto& j : doc) {
      RepoFindingProfile p;
      p.repo_id = j.at("repo_id").get<std::string>();
      for (const auto& f : j.at("frequencies")) {
        int cwe = f.at("cwe").get<int>();
        int count = f.at("count").get<int>();
        if (cwe <= 0 || count <= 0)
          throw ParseError(fmt::format("profile {}: non-positive frequency entry", p.repo_id));
        p.frequencies[cwe] = count;
      }
      p.total = j.at("total").get<int>();
      p.skipped = j.value("skipped", 0);
      if (j.contains("provenance"))
        for (const auto& pv : j.at("provenance"))
          p.provenance[pv.at("cwe").get<int>()].push_back(
              {tool_from_string(pv.at("tool").get<std::string>()), pv.at("file").get<std::string>(),
               pv.at("line").get<int>()});
      int sum = 0;
      for (auto [c, n] : p.frequencies)
        sum += n;
      if (sum != p.total)
        throw Error(ErrorKind::Integrity,
                    fmt::format("profile {}: total {} differs from frequency sum {}", p.repo_id, p.total, sum));
      if (!out.emplace(p.repo_id, p).second)
        throw Error(ErrorKind::Integrity, fmt::format("duplicate profile for {}", p.repo_id));
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(fmt::format("profile document: {}", e.what()));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool ends_with(const std::string& s, std::string_view suffix) { return s.ends_with(suffix); }

RepoFindingProfile ingest_repository(const std::filesystem::path& dir, const std::string& repo,
                                     const IngestOptions& options) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file())
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<RawFinding> all;
  int dropped = 0; // records skipped before becoming findings
  auto take = [&](ParsedFindings parsed) {
    std::size_t unresolved = 0;
    for (auto& f : parsed.findings) {
      if (!f.cwe_id)
        ++unresolved;
      all.push_back(std::move(f));
    }
    dropped += static_cast<int>(parsed.skipped - std::min(parsed.skipped, unresolved));
  };

  for (const auto& path : files) {
    const std::string name = path.filename().string();
    auto context = [&](const Error& e) -> Error {
      auto msg = fmt::format("{}: {}", path.string(), e.what());
      if (e.kind() == ErrorKind::Parse)
        return ParseError(msg);
      return Error(e.kind(), msg);
    };
    try {
      if (ends_with(name, ".sarif") || ends_with(name, ".sarif.json")) {
        take(parse_sarif(io::read_file(path), repo));
      } else if (ends_with(name, ".joern.jsonl")) {
        if (options.joern_manifest == nullptr)
          throw Error(ErrorKind::Config, "Joern results present but no query manifest configured");
        take(parse_joern_results(io::read_file(path), *options.joern_manifest, repo));
      } else if (ends_with(name, ".scanner.json")) {
        if (options.scanner_map == nullptr)
          throw Error(ErrorKind::Config, "scanner output present but no category map configured");
        take(parse_scanner_output(io::read_file(path), *options.scanner_map, repo));
      }
    } catch (const Error& e) {
      throw context(e);
    }
  }

  auto profiles = normalize_and_dedup(all, options.dedup);
  RepoFindingProfile p;
  if (auto it = profiles.find(repo); it != profiles.end())
    p = std::move(it->second);
  p.repo_id = repo;
  p.skipped += dropped;
  return p;
}

} // namespace

ProfileMap ingest_directory(const std::filesystem::path& dir, const IngestOptions& options) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorKind::Io, fmt::format("findings directory {} does not exist", dir.string()));
  std::vector<std::string> repos;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory())
      repos.push_back(entry.path().filename().string());
  std::sort(repos.begin(), repos.end());

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  ProfileMap out;
  // Bounded fan-out; results are joined in repository order so the first
  // failure reported does not depend on scheduling.
  for (std::size_t start = 0; start < repos.size(); start += threads) {
    std::vector<std::future<RepoFindingProfile>> batch;
    for (std::size_t i = start; i < std::min(repos.size(), start + threads); ++i)
      batch.push_back(std::async(std::launch::async, ingest_repository, dir / repos[i], repos[i],
                                 std::cref(options)));
    for (auto& f : batch) {
      auto p = f.get();
      out.emplace(p.repo_id, std::move(p));
    }
  }
  return out;
}

} // namespace mcprisk::findings
