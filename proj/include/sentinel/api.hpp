/*
 * Copyright 2026 The Sentinel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// HTTP/JSON control interface under /api/v1/.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "sentinel/engine.hpp"
#include "sentinel/net.hpp"

namespace httplib {
class Server;
}

namespace sentinel::api {

struct StatusFilter {
  std::optional<ObjectStatus> status;
  std::optional<std::string> hostgroup;
  bool problem_only = false;
  std::size_t offset = 0;
  std::optional<std::size_t> limit;
};

class ApiError : public std::runtime_error {
 public:
  ApiError(int http_status, const std::string& message) : std::runtime_error(message), status_(http_status) {}
  int http_status() const { return status_; }

 private:
  int status_;
};

/// One object as reported by the API.
nlohmann::json object_json(const engine::ObjectView& v);

/// The status document: counts aggregate the filtered objects (before paging).
/// Throws ApiError(404) for an unknown hostgroup.
nlohmann::json status_document(const engine::EngineSnapshot& snap, const objconf::ResolvedConfig& config,
                               const StatusFilter& filter);

struct ApiOptions {
  net::Endpoint listen{"127.0.0.1", 0};
  std::optional<std::string> token;
};

class ApiServer {
 public:
  ApiServer(engine::Engine& engine, ApiOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread. Throws net::NetError.
  void start();
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  engine::Engine& engine_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace sentinel::api
