// Copyright 2026 The biasaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biasaudit/http.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "biasaudit/types.h"

namespace biasaudit {
namespace {

httplib::Headers ToHeaders(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

httplib::Client MakeClient(const std::string& origin, double timeout_seconds) {
  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs =
      static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  return client;
}

}  // namespace

std::pair<std::string, std::string> SplitEndpoint(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint '" + std::string(url) + "' lacks a scheme");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported endpoint scheme '" + std::string(scheme) + "'");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return {std::string(url), ""};
  std::string prefix(url.substr(path_start));
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {std::string(url.substr(0, path_start)), prefix};
}

HttpResponse HttpPostJson(std::string_view endpoint, std::string_view path,
                          const std::string& body, const HttpHeaders& headers,
                          double timeout_seconds) {
  const auto [origin, prefix] = SplitEndpoint(endpoint);
  auto client = MakeClient(origin, timeout_seconds);
  const std::string full = prefix + std::string(path);
  auto res = client.Post(full, ToHeaders(headers), body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport, "POST " + origin + full + " failed: " +
                                           httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

HttpResponse HttpGet(std::string_view endpoint, std::string_view path,
                     const HttpHeaders& headers, double timeout_seconds) {
  const auto [origin, prefix] = SplitEndpoint(endpoint);
  auto client = MakeClient(origin, timeout_seconds);
  const std::string full = prefix + std::string(path);
  auto res = client.Get(full, ToHeaders(headers));
  if (!res) {
    throw Error(ErrorCode::kTransport, "GET " + origin + full + " failed: " +
                                           httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

}  // namespace biasaudit
