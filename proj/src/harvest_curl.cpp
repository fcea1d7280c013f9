// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <mutex>

#include <curl/curl.h>
#include <fmt/format.h>

#include "mcprisk/error.hpp"
#include "mcprisk/harvest.hpp"

namespace mcprisk::harvest {

namespace {

std::once_flag g_curl_init;

std::size_t on_body(char* data, std::size_t size, std::size_t n, void* user) {
  static_cast<std::string*>(user)->append(data, size * n);
  return size * n;
}

std::size_t on_header(char* data, std::size_t size, std::size_t n, void* user) {
  std::string_view line(data, size * n);
  auto colon = line.find(':');
  if (colon != line.npos) {
    std::string name(line.substr(0, colon));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto value = line.substr(colon + 1);
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
      value.remove_prefix(1);
    while (!value.empty() && (value.back() == '\r' || value.back() == '\n' || value.back() == ' '))
      value.remove_suffix(1);
    (*static_cast<std::map<std::string, std::string>*>(user))[name] = std::string(value);
  }
  return size * n;
}

class CurlTransport final : public HttpTransport {
public:
  CurlTransport() {
    std::call_once(g_curl_init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
    handle_ = curl_easy_init();
    if (handle_ == nullptr)
      throw Error(ErrorKind::Network, "cannot initialise libcurl");
  }
  ~CurlTransport() override { curl_easy_cleanup(handle_); }

  HttpResponse get(const std::string& url, const std::map<std::string, std::string>& headers) override {
    HttpResponse resp;
    curl_slist* list = nullptr;
    for (const auto& [k, v] : headers)
      list = curl_slist_append(list, fmt::format("{}: {}", k, v).c_str());
    curl_easy_reset(handle_);
    curl_easy_setopt(handle_, CURLOPT_URL, url.c_str());
    curl_easy_setopt(handle_, CURLOPT_HTTPHEADER, list);
    curl_easy_setopt(handle_, CURLOPT_WRITEFUNCTION, &on_body);
    curl_easy_setopt(handle_, CURLOPT_WRITEDATA, &resp.body);
    curl_easy_setopt(handle_, CURLOPT_HEADERFUNCTION, &on_header);
    curl_easy_setopt(handle_, CURLOPT_HEADERDATA, &resp.headers);
    curl_easy_setopt(handle_, CURLOPT_TIMEOUT, 60L);
    curl_easy_setopt(handle_, CURLOPT_FOLLOWLOCATION, 1L);
    CURLcode rc = curl_easy_perform(handle_);
    curl_slist_free_all(list);
    if (rc != CURLE_OK)
      throw Error(ErrorKind::Network, fmt::format("{}: {}", url, curl_easy_strerror(rc)));
    long status = 0;
    curl_easy_getinfo(handle_, CURLINFO_RESPONSE_CODE, &status);
    resp.status = static_cast<int>(status);
    return resp;
  }

private:
  CURL* handle_ = nullptr;
};

} // namespace

std::unique_ptr<HttpTransport> make_curl_transport() { return std::make_unique<CurlTransport>(); }

} // namespace mcprisk::harvest
