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

#include "sentinel/api.hpp"

#include <httplib.h>

#include <algorithm>
#include <set>

#include "sentinel/strutil.hpp"

namespace sentinel::api {

using nlohmann::json;

namespace {

json error_body(const std::string& message) { return {{"error", message}}; }

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int http_status(engine::CommandStatus s) {
  switch (s) {
    case engine::CommandStatus::Accepted: return 202;
    case engine::CommandStatus::NotFound: return 404;
    case engine::CommandStatus::Conflict: return 409;
    case engine::CommandStatus::Invalid: return 400;
  }
  return 500;
}

void reply_command(httplib::Response& res, const engine::CommandResult& r) {
  if (r.ok()) {
    reply(res, 202, {{"accepted", true}});
  } else {
    reply(res, http_status(r.status), error_body(r.message));
  }
}

json parse_body(const httplib::Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error&) {
    throw ApiError(400, "request body is not valid JSON");
  }
  if (!body.is_object()) throw ApiError(400, "request body must be a JSON object");
  return body;
}

std::string need_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string() || it->get<std::string>().empty())
    throw ApiError(400, std::string("field '") + field + "' must be a non-empty string");
  return it->get<std::string>();
}

std::string opt_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || it->is_null()) return {};
  if (!it->is_string()) throw ApiError(400, std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

std::int64_t need_int(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_number_integer())
    throw ApiError(400, std::string("field '") + field + "' must be an integer");
  return it->get<std::int64_t>();
}

ObjectKey target(const json& body) {
  auto host = need_string(body, "host");
  auto service = opt_string(body, "service");
  return service.empty() ? ObjectKey::for_host(host) : ObjectKey::for_service(host, service);
}

json time_or_null(TimePoint t, bool set) { return set ? json(format_iso8601(t)) : json(nullptr); }

bool truthy(const std::string& v) { return v == "1" || iequals(v, "true") || iequals(v, "yes"); }

StatusFilter parse_filter(const httplib::Request& req) {
  StatusFilter f;
  if (req.has_param("status")) {
    auto s = parse_object_status(req.get_param_value("status"));
    if (!s) throw ApiError(400, "unknown status '" + req.get_param_value("status") + "'");
    f.status = *s;
  }
  if (req.has_param("hostgroup")) f.hostgroup = req.get_param_value("hostgroup");
  for (const char* name : {"problem_only", "problem-only", "problems"}) {
    if (req.has_param(name)) f.problem_only = truthy(req.get_param_value(name));
  }
  auto number = [&](const char* name) -> std::optional<std::size_t> {
    if (!req.has_param(name)) return std::nullopt;
    auto v = parse_int(req.get_param_value(name));
    if (!v || *v < 0) throw ApiError(400, std::string("'") + name + "' must be a non-negative integer");
    return static_cast<std::size_t>(*v);
  };
  f.offset = number("offset").value_or(0);
  f.limit = number("limit");
  return f;
}

}  // namespace

json object_json(const engine::ObjectView& v) {
  const auto& s = v.state;
  json j;
  j["type"] = v.key.is_host() ? "host" : "service";
  j["host"] = v.key.host;
  if (!v.key.is_host()) j["service"] = v.key.service;
  j["status"] = std::string(to_string(s.current_status));
  j["state_type"] = std::string(state::to_string(s.state_type));
  j["attempt"] = s.attempt;
  j["max_attempts"] = v.max_attempts;
  j["last_output"] = s.last_output;
  j["acknowledged"] = s.acknowledged;
  j["in_downtime"] = v.in_downtime;
  j["active_checks"] = v.active_checks;
  j["last_check"] = time_or_null(s.last_check, s.checked);
  j["last_state_change"] = time_or_null(s.last_state_change, s.checked);
  j["last_hard_change"] = time_or_null(s.last_hard_change, s.checked);
  j["last_notification"] = s.last_notification ? json(format_iso8601(*s.last_notification)) : json(nullptr);
  if (s.ack) j["ack"] = {{"who", s.ack->who}, {"comment", s.ack->comment}, {"at", format_iso8601(s.ack->at)}};
  json downtimes = json::array();
  for (const auto& d : s.downtimes) {
    downtimes.push_back({{"start", to_epoch_seconds(d.start)},
                         {"end", to_epoch_seconds(d.end)},
                         {"author", d.author},
                         {"comment", d.comment}});
  }
  j["downtimes"] = std::move(downtimes);
  return j;
}

json status_document(const engine::EngineSnapshot& snap, const objconf::ResolvedConfig& config,
                     const StatusFilter& filter) {
  std::set<std::string> members;
  if (filter.hostgroup) {
    auto hg = config.hostgroups.find(*filter.hostgroup);
    if (hg == config.hostgroups.end()) throw ApiError(404, "unknown hostgroup '" + *filter.hostgroup + "'");
    members.insert(hg->second.members.begin(), hg->second.members.end());
  }
  std::map<std::string, int> hosts{{"total", 0}, {"up", 0}, {"down", 0}, {"unreachable", 0}};
  std::map<std::string, int> services{{"total", 0}, {"ok", 0}, {"warning", 0}, {"critical", 0}, {"unknown", 0}};
  json objects = json::array();
  std::size_t matched = 0;
  for (const auto& v : snap.objects) {
    if (filter.hostgroup && !members.count(v.key.host)) continue;
    if (filter.status && v.state.current_status != *filter.status) continue;
    if (filter.problem_only && !v.state.hard_problem()) continue;
    auto& counts = v.key.is_host() ? hosts : services;
    ++counts["total"];
    std::string name(to_string(v.state.current_status));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    ++counts[name];
    if (matched++ < filter.offset) continue;
    if (filter.limit && objects.size() >= *filter.limit) continue;
    objects.push_back(object_json(v));
  }
  json doc;
  doc["generated_at"] = format_iso8601(snap.taken_at);
  doc["counts"] = {{"hosts", hosts}, {"services", services}};
  doc["total_objects"] = matched;
  doc["objects"] = std::move(objects);
  return doc;
}

ApiServer::ApiServer(engine::Engine& engine, ApiOptions options)
    : engine_(engine), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::start() {
  auto host = options_.listen.host.empty() ? std::string("0.0.0.0") : options_.listen.host;
  if (options_.listen.port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ < 0) throw net::NetError("cannot bind API to " + host);
  } else {
    if (!server_->bind_to_port(host, options_.listen.port))
      throw net::NetError("cannot bind API to " + options_.listen.str());
    port_ = options_.listen.port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void ApiServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiServer::routes() {
  auto& s = *server_;
  const auto token = options_.token;
  s.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (!token) return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") == "Bearer " + *token)
      return httplib::Server::HandlerResponse::Unhandled;
    reply(res, 401, error_body("missing or wrong bearer token"));
    return httplib::Server::HandlerResponse::Handled;
  });
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) reply(res, res.status, error_body(res.status == 404 ? "no such endpoint" : "error"));
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const ApiError& e) {
      reply(res, e.http_status(), error_body(e.what()));
    } catch (const std::exception& e) {
      reply(res, 500, error_body(e.what()));
    } catch (...) {
      reply(res, 500, error_body("internal error"));
    }
  });

  s.Get("/api/v1/status", [this](const httplib::Request& req, httplib::Response& res) {
    auto filter = parse_filter(req);
    reply(res, 200, status_document(engine_.snapshot(), engine_.config(), filter));
  });

  auto object = [this](const ObjectKey& key, httplib::Response& res) {
    auto snap = engine_.snapshot();
    json out;
    bool found = false;
    json services = json::array();
    for (const auto& v : snap.objects) {
      if (v.key == key) {
        out = object_json(v);
        found = true;
      } else if (key.is_host() && v.key.host == key.host) {
        services.push_back(object_json(v));
      }
    }
    if (!found) throw ApiError(404, "unknown object " + key.str());
    if (key.is_host()) out["services"] = std::move(services);
    reply(res, 200, out);
  };
  s.Get(R"(/api/v1/objects/([^/]+))", [object](const httplib::Request& req, httplib::Response& res) {
    object(ObjectKey::for_host(req.matches[1]), res);
  });
  s.Get(R"(/api/v1/objects/([^/]+)/(.+))", [object](const httplib::Request& req, httplib::Response& res) {
    object(ObjectKey::for_service(req.matches[1], req.matches[2]), res);
  });

  s.Post("/api/v1/ack", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    auto key = target(body);
    auto who = opt_string(body, "who");
    reply_command(res, engine_.acknowledge(key, who.empty() ? "api" : who, opt_string(body, "comment")));
  });

  s.Post("/api/v1/downtime", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    auto key = target(body);
    auto start = from_epoch_seconds(need_int(body, "start"));
    auto end = from_epoch_seconds(need_int(body, "end"));
    reply_command(res, engine_.add_downtime(key, start, end, opt_string(body, "author"), opt_string(body, "comment")));
  });

  s.Post("/api/v1/check", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    reply_command(res, engine_.force_check(target(body)));
  });

  s.Post("/api/v1/result", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    passive::PassiveResultLine line;
    line.host = need_string(body, "host");
    line.service = opt_string(body, "service");
    auto kind = opt_string(body, "kind");
    if (kind.empty()) kind = line.service.empty() ? "host" : "service";
    if (kind == "host") {
      line.kind = passive::ResultKind::Host;
    } else if (kind == "service") {
      line.kind = passive::ResultKind::Service;
    } else {
      throw ApiError(400, "kind must be 'host' or 'service'");
    }
    auto code = need_int(body, "code");
    if (code < 0 || code > 3) throw ApiError(400, "code out of range");
    line.code = static_cast<int>(code);
    line.output = opt_string(body, "output");
    line.received_at = body.contains("timestamp") ? need_int(body, "timestamp") : to_epoch_seconds(Clock::now());
    reply_command(res, engine_.submit_passive(line, "api " + req.remote_addr));
  });
}

}  // namespace sentinel::api
