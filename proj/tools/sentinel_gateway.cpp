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

// sentinel-gateway: accepts passive results over TCP. Accepted records are
// relayed to an engine API when --api is given, else printed to stdout.

#include <httplib.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <mutex>

#include "cli_common.hpp"
#include "sentinel/engine.hpp"

using namespace sentinel;

int main(int argc, char** argv) {
  CLI::App app("sentinel-gateway: passive result gateway");
  std::string listen = "127.0.0.1:5667", token_file, api, api_token_file, audit_file;
  std::size_t max_line = 8192;
  int skew = 15 * 60;
  app.add_option("--listen", listen, "address:port to listen on (port 0 picks one)");
  app.add_option("--token-file", token_file, "producers must send AUTH <token> first")->check(CLI::ExistingFile);
  app.add_option("--api", api, "engine API address:port to relay results to");
  app.add_option("--api-token-file", api_token_file, "bearer token for --api")->check(CLI::ExistingFile);
  app.add_option("--max-line", max_line, "longest accepted line in bytes");
  app.add_option("--skew-seconds", skew, "trusted producer clock skew");
  app.add_option("--audit-log", audit_file, "audit log file");
  CLI11_PARSE(app, argc, argv);

  auto sigs = cli::block_stop_signals();
  try {
    auto endpoint = net::Endpoint::parse(listen);
    if (!endpoint) throw std::runtime_error("bad --listen address '" + listen + "'");
    auto audit = audit_file.empty() ? std::make_unique<AuditLog>() : std::make_unique<AuditLog>(audit_file);

    std::mutex mu;
    std::unique_ptr<httplib::Client> relay;
    if (!api.empty()) {
      auto ep = net::Endpoint::parse(api);
      if (!ep) throw std::runtime_error("bad --api address '" + api + "'");
      relay = std::make_unique<httplib::Client>(ep->host, ep->port);
      if (auto token = cli::read_token(api_token_file)) relay->set_bearer_token_auth(*token);
    }
    passive::ResultSink sink = [&](const ObjectKey& key, const CheckResult& r) {
      auto line = engine::to_wire(key, r);
      std::lock_guard lock(mu);
      if (!relay) {
        std::cout << passive::encode_line(line) << std::flush;
        return;
      }
      nlohmann::json body{{"host", line.host},
                          {"kind", line.kind == passive::ResultKind::Host ? "host" : "service"},
                          {"code", line.code},
                          {"output", line.output},
                          {"timestamp", line.received_at}};
      if (!line.service.empty()) body["service"] = line.service;
      auto res = relay->Post("/api/v1/result", body.dump(), "application/json");
      if (!res || res->status != 202) {
        audit->record("gateway", "relay of " + key.str() + " failed: " +
                                     (res ? std::to_string(res->status) + " " + res->body : std::string("unreachable")));
      }
    };

    passive::GatewayOptions opts;
    opts.listen = *endpoint;
    opts.token = cli::read_token(token_file);
    opts.max_line = max_line;
    opts.skew = Seconds(skew);
    passive::Gateway gw(opts, sink, audit.get());
    gw.start();
    std::cerr << "sentinel-gateway: listening on " << endpoint->host << ":" << gw.port() << std::endl;
    cli::wait_for_stop_signal(sigs);
    gw.stop();
    auto s = gw.stats();
    std::cerr << "sentinel-gateway: accepted " << s.accepted << ", rejected " << s.rejected << ", auth failures "
              << s.auth_failures << std::endl;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sentinel-gateway: " << e.what() << "\n";
    return 2;
  }
}
