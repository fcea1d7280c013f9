// SPDX-License-Identifier: Apache-2.0
//
// Streaming (expat) readers for the MITRE CWE 4.x and CAPEC 3.x catalogs.
// Only the handful of elements the scoring model needs are captured; the rest
// of each record is skipped.
#include <algorithm>
#include <charconv>
#include <cstring>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <expat.h>
#include <fmt/format.h>

#include "mcprisk/catalog.hpp"
#include "mcprisk/error.hpp"

namespace mcprisk::catalog {

namespace {

constexpr std::string_view kSoftwareDevelopmentView = "699";

std::string_view local_name(const XML_Char* name) {
  std::string_view n(name);
  if (auto colon = n.rfind(':'); colon != n.npos)
    n.remove_prefix(colon + 1);
  return n;
}

const XML_Char* attribute(const XML_Char** attrs, std::string_view wanted) {
  for (int i = 0; attrs[i] != nullptr; i += 2)
    if (local_name(attrs[i]) == wanted)
      return attrs[i + 1];
  return nullptr;
}

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; };
  while (!s.empty() && ws(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && ws(s.back()))
    s.remove_suffix(1);
  return s;
}

/// Common expat plumbing: element stack, text capture and error positions.
class SaxReader {
public:
  SaxReader() : parser_(XML_ParserCreate(nullptr)) {
    if (parser_ == nullptr)
      throw Error(ErrorKind::Io, "cannot allocate XML parser");
    XML_SetUserData(parser_, this);
    XML_SetElementHandler(parser_, &SaxReader::on_start, &SaxReader::on_end);
    XML_SetCharacterDataHandler(parser_, &SaxReader::on_text);
  }
  virtual ~SaxReader() { XML_ParserFree(parser_); }
  SaxReader(const SaxReader&) = delete;
  SaxReader& operator=(const SaxReader&) = delete;

  void run(std::string_view xml) {
    constexpr std::size_t kChunk = 1 << 20;
    std::size_t offset = 0;
    do {
      std::size_t n = std::min(kChunk, xml.size() - offset);
      bool last = offset + n == xml.size();
      if (XML_Parse(parser_, xml.data() + offset, static_cast<int>(n), last) == XML_STATUS_ERROR) {
        if (pending_)
          std::rethrow_exception(pending_);
        throw ParseError(fmt::format("malformed XML: {}", XML_ErrorString(XML_GetErrorCode(parser_))),
                         XML_GetCurrentLineNumber(parser_), XML_GetCurrentColumnNumber(parser_) + 1);
      }
      offset += n;
    } while (offset < xml.size());
    if (pending_)
      std::rethrow_exception(pending_);
    if (!saw_root_)
      throw ParseError("empty XML document");
  }

protected:
  virtual void start(std::string_view name, const XML_Char** attrs) = 0;
  virtual void end(std::string_view name, std::string text) = 0;

  /// Parent chain check: parent(0) is the element itself.
  std::string_view parent(std::size_t up) const {
    return up < stack_.size() ? stack_[stack_.size() - 1 - up] : std::string_view{};
  }
  std::size_t depth() const { return stack_.size(); }

  void capture_text() { capturing_ = true; text_.clear(); }

  [[noreturn]] void fail(const std::string& message, ErrorKind kind = ErrorKind::Parse) {
    if (kind == ErrorKind::Parse)
      throw ParseError(message, XML_GetCurrentLineNumber(parser_),
                       XML_GetCurrentColumnNumber(parser_) + 1);
    throw Error(kind, fmt::format("{} (line {})", message, XML_GetCurrentLineNumber(parser_)));
  }

  int integer_attribute(const XML_Char** attrs, std::string_view name) {
    const XML_Char* raw = attribute(attrs, name);
    if (raw == nullptr)
      fail(fmt::format("<{}> lacks attribute {}", parent(0), name));
    std::string_view v = trim(raw);
    int value = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || value <= 0)
      fail(fmt::format("<{}> has invalid {} '{}'", parent(0), name, v));
    return value;
  }

  bool saw_root_ = false;

private:
  static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    auto* r = static_cast<SaxReader*>(self);
    if (r->pending_)
      return;
    try {
      r->stack_.emplace_back(local_name(name));
      r->saw_root_ = true;
      r->start(r->stack_.back(), attrs);
    } catch (...) {
      r->pending_ = std::current_exception();
      XML_StopParser(r->parser_, XML_FALSE);
    }
  }

  static void XMLCALL on_end(void* self, const XML_Char* name) {
    auto* r = static_cast<SaxReader*>(self);
    if (r->pending_)
      return;
    try {
      std::string text;
      if (r->capturing_) {
        text = std::string(trim(r->text_));
        r->capturing_ = false;
      }
      r->end(local_name(name), std::move(text));
      r->stack_.pop_back();
    } catch (...) {
      r->pending_ = std::current_exception();
      XML_StopParser(r->parser_, XML_FALSE);
    }
  }

  static void XMLCALL on_text(void* self, const XML_Char* s, int len) {
    auto* r = static_cast<SaxReader*>(self);
    if (r->capturing_)
      r->text_.append(s, static_cast<std::size_t>(len));
  }

  XML_Parser parser_;
  std::vector<std::string> stack_;
  bool capturing_ = false;
  std::string text_;
  std::exception_ptr pending_;
};

// ---------------------------------------------------------------------------

class CweReader final : public SaxReader {
public:
  WeaknessCatalog result;

  void finish() {
    result.has_software_view = !view_members_.empty();
    for (auto& w : result.weaknesses)
      w.software_view = view_members_.contains(w.cwe_id);
  }

protected:
  void start(std::string_view name, const XML_Char** attrs) override {
    if (depth() == 1) {
      if (name != "Weakness_Catalog")
        fail(fmt::format("not a CWE catalog (root element <{}>)", name));
      if (const XML_Char* v = attribute(attrs, "Version"))
        result.version = v;
      return;
    }
    if (name == "Weakness" && parent(1) == "Weaknesses") {
      current_ = WeaknessRecord{};
      current_.cwe_id = integer_attribute(attrs, "ID");
      if (const XML_Char* n = attribute(attrs, "Name"))
        current_.name = n;
      if (const XML_Char* s = attribute(attrs, "Status"))
        current_.status = s;
      in_weakness_ = true;
      return;
    }
    if (in_weakness_) {
      if (name == "Likelihood_Of_Exploit" && parent(1) == "Weakness") {
        capture_text();
      } else if (name == "Introduction" && parent(1) == "Modes_Of_Introduction") {
        current_.modes_of_introduction.emplace_back();
      } else if (name == "Phase" && parent(1) == "Introduction") {
        capture_text();
      } else if (name == "Consequence" && parent(1) == "Common_Consequences") {
        current_.consequences.emplace_back();
      } else if ((name == "Impact" || name == "Scope") && parent(1) == "Consequence") {
        capture_text();
      } else if (name == "Related_Attack_Pattern" && parent(1) == "Related_Attack_Patterns") {
        current_.related_capec_ids.push_back(integer_attribute(attrs, "CAPEC_ID"));
      }
      return;
    }
    if (name == "Has_Member") {
      const XML_Char* view = attribute(attrs, "View_ID");
      bool category_member = parent(1) == "Relationships" && parent(2) == "Category";
      bool view_member = parent(1) == "Members" && parent(2) == "View" && current_view_ == kSoftwareDevelopmentView;
      if (category_member && view != nullptr && std::string_view(view) == kSoftwareDevelopmentView)
        view_members_.insert(integer_attribute(attrs, "CWE_ID"));
      else if (view_member)
        view_members_.insert(integer_attribute(attrs, "CWE_ID"));
      return;
    }
    if (name == "View" && parent(1) == "Views") {
      const XML_Char* id = attribute(attrs, "ID");
      current_view_ = id ? id : "";
    }
  }

  void end(std::string_view name, std::string text) override {
    if (!in_weakness_)
      return;
    if (name == "Weakness" && parent(1) == "Weaknesses") {
      if (!ids_.insert(current_.cwe_id).second)
        fail(fmt::format("duplicate CWE-{}", current_.cwe_id), ErrorKind::Integrity);
      result.weaknesses.push_back(std::move(current_));
      in_weakness_ = false;
    } else if (name == "Likelihood_Of_Exploit" && parent(1) == "Weakness") {
      current_.likelihood_of_exploit = parse_likelihood(text);
    } else if (name == "Phase" && parent(1) == "Introduction") {
      current_.modes_of_introduction.back() = std::move(text);
    } else if (name == "Impact" && parent(1) == "Consequence") {
      current_.consequences.back().impacts.push_back(std::move(text));
    } else if (name == "Scope" && parent(1) == "Consequence") {
      current_.consequences.back().scopes.push_back(std::move(text));
    }
  }

private:
  WeaknessRecord current_;
  bool in_weakness_ = false;
  std::string current_view_;
  std::unordered_set<int> ids_;
  std::set<int> view_members_;
};

class CapecReader final : public SaxReader {
public:
  AttackPatternCatalog result;

protected:
  void start(std::string_view name, const XML_Char** attrs) override {
    if (depth() == 1) {
      if (name != "Attack_Pattern_Catalog")
        fail(fmt::format("not a CAPEC catalog (root element <{}>)", name));
      if (const XML_Char* v = attribute(attrs, "Version"))
        result.version = v;
      return;
    }
    if (name == "Attack_Pattern" && parent(1) == "Attack_Patterns") {
      current_ = AttackPatternRecord{};
      current_.capec_id = integer_attribute(attrs, "ID");
      if (const XML_Char* n = attribute(attrs, "Name"))
        current_.name = n;
      if (const XML_Char* s = attribute(attrs, "Status"))
        current_.status = s;
      in_pattern_ = true;
      return;
    }
    if (!in_pattern_)
      return;
    if ((name == "Likelihood_Of_Attack" || name == "Typical_Severity") && parent(1) == "Attack_Pattern")
      capture_text();
    else if (name == "Related_Weakness" && parent(1) == "Related_Weaknesses")
      current_.related_cwe_ids.push_back(integer_attribute(attrs, "CWE_ID"));
  }

  void end(std::string_view name, std::string text) override {
    if (!in_pattern_)
      return;
    if (name == "Attack_Pattern" && parent(1) == "Attack_Patterns") {
      if (!ids_.insert(current_.capec_id).second)
        fail(fmt::format("duplicate CAPEC-{}", current_.capec_id), ErrorKind::Integrity);
      result.patterns.push_back(std::move(current_));
      in_pattern_ = false;
    } else if (name == "Likelihood_Of_Attack" && parent(1) == "Attack_Pattern") {
      current_.likelihood_of_attack = parse_likelihood(text);
    } else if (name == "Typical_Severity" && parent(1) == "Attack_Pattern") {
      current_.typical_severity = parse_severity(text);
    }
  }

private:
  AttackPatternRecord current_;
  bool in_pattern_ = false;
  std::unordered_set<int> ids_;
};

} // namespace

WeaknessCatalog parse_cwe_catalog(std::string_view xml) {
  CweReader reader;
  reader.run(xml);
  reader.finish();
  return std::move(reader.result);
}

AttackPatternCatalog parse_capec_catalog(std::string_view xml) {
  CapecReader reader;
  reader.run(xml);
  return std::move(reader.result);
}

} // namespace mcprisk::catalog
