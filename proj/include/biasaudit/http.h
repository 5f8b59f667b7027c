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

#ifndef BIASAUDIT_HTTP_H_
#define BIASAUDIT_HTTP_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biasaudit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// Splits "http://host:port/prefix" into the origin and the path prefix
// ("" when absent). Throws Error(kInvalidArgument) for other schemes.
std::pair<std::string, std::string> SplitEndpoint(std::string_view url);

// Both throw Error(kTransport) when no HTTP response is received.
HttpResponse HttpPostJson(std::string_view endpoint, std::string_view path,
                          const std::string& body, const HttpHeaders& headers,
                          double timeout_seconds);
HttpResponse HttpGet(std::string_view endpoint, std::string_view path,
                     const HttpHeaders& headers, double timeout_seconds);

}  // namespace biasaudit

#endif  // BIASAUDIT_HTTP_H_
