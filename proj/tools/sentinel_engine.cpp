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

// sentinel-engine: the central engine with its API and optional gateway.
// Options may also come from an INI file (--ini), one key per long option.

#include <CLI11.hpp>
#include <memory>

#include "cli_common.hpp"
#include "sentinel/api.hpp"
#include "sentinel/engine.hpp"

using namespace sentinel;

namespace {

net::Endpoint endpoint_or_throw(const std::string& text, const char* what) {
  auto ep = net::Endpoint::parse(text);
  if (!ep) throw std::runtime_error(std::string("bad ") + what + " address '" + text + "'");
  return *ep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("sentinel-engine: central monitoring engine");
  app.set_config("--ini", "", "read options from an INI file");

  std::vector<std::string> files;
  int interval = 60, status_interval = 10, check_timeout = 10, skew = 15 * 60, tick_ms = 1000;
  std::size_t max_concurrent = 32, dispatch_workers = 4;
  bool no_active = false, no_notify = false, no_stagger = false;
  std::string tz = "local", plugin_dir, ping_command = "ping";
  std::string status_dir, retention_file, event_log, audit_log, dispatch_log;
  std::string api_listen = "127.0.0.1:8080", api_token_file, gateway_listen, gateway_token_file;
  std::string engine_name = "Sentinel", version = "1.0";

  app.add_option("configs", files, "object definition files")->required()->check(CLI::ExistingFile);
  app.add_option("--interval-length", interval, "seconds per interval unit")->check(CLI::PositiveNumber);
  app.add_option("--timezone", tz, "local or utc");
  app.add_flag("--no-active-checks", no_active, "only accept passive results");
  app.add_option("--max-concurrent", max_concurrent, "parallel active checks");
  app.add_option("--check-timeout", check_timeout, "plugin timeout in seconds")->check(CLI::PositiveNumber);
  app.add_option("--plugin-dir", plugin_dir, "prefix for relative plugin paths");
  app.add_option("--ping-command", ping_command, "ping executable for the ping probe");
  app.add_flag("--no-stagger", no_stagger, "start every check at once");
  app.add_option("--status-dir", status_dir, "directory for status.dat");
  app.add_option("--status-interval", status_interval, "seconds between status writes")
      ->check(CLI::PositiveNumber);
  app.add_option("--retention-file", retention_file, "state kept across restarts");
  app.add_option("--event-log", event_log, "state event log");
  app.add_option("--audit-log", audit_log, "audit log");
  app.add_option("--dispatch-log", dispatch_log, "notification dispatch log");
  app.add_flag("--no-notifications", no_notify, "never run notification channels");
  app.add_option("--dispatch-workers", dispatch_workers, "parallel notification dispatches");
  app.add_option("--engine-name", engine_name, "name in notification headers");
  app.add_option("--engine-version", version, "version in notification headers");
  app.add_option("--tick-ms", tick_ms, "renotification and downtime cadence")->check(CLI::PositiveNumber);
  app.add_option("--api-listen", api_listen, "API address:port (port 0 picks one)");
  app.add_option("--api-token-file", api_token_file, "bearer token required by the API")
      ->check(CLI::ExistingFile);
  app.add_option("--gateway-listen", gateway_listen, "also accept passive results on address:port");
  app.add_option("--gateway-token-file", gateway_token_file, "AUTH token for the gateway")
      ->check(CLI::ExistingFile);
  app.add_option("--skew-seconds", skew, "trusted producer clock skew");
  CLI11_PARSE(app, argc, argv);

  auto sigs = cli::block_stop_signals();
  try {
    auto config = cli::load_config_or_throw(files);

    engine::EngineOptions o;
    o.interval_length = Seconds(interval);
    if (tz == "utc" || tz == "UTC") {
      o.zone = TimeZone::utc();
    } else if (tz != "local") {
      throw std::runtime_error("--timezone must be local or utc");
    }
    o.dispatch.zone = o.zone;
    o.dispatch.engine_name = engine_name;
    o.dispatch.version = version;
    o.active_checks = !no_active;
    o.max_concurrent = max_concurrent;
    o.check_timeout = std::chrono::seconds(check_timeout);
    o.plugin_dir = plugin_dir;
    o.stagger = !no_stagger;
    o.executor = std::make_shared<checkcore::PluginExecutor>(checkcore::PingOptions{ping_command});
    if (!status_dir.empty()) o.status_dir = status_dir;
    o.status_interval = Seconds(status_interval);
    if (!retention_file.empty()) o.retention_file = retention_file;
    if (!event_log.empty()) o.event_log_file = event_log;
    if (!audit_log.empty()) o.audit_log_file = audit_log;
    if (!dispatch_log.empty()) o.dispatch_log_file = dispatch_log;
    o.notifications = !no_notify;
    o.dispatch_workers = dispatch_workers;
    o.tick = std::chrono::milliseconds(tick_ms);
    o.passive_skew = Seconds(skew);

    const auto hosts = config.hosts.size(), services = config.services.size();
    engine::Engine eng(std::move(config), o);
    eng.start();

    api::ApiServer api(eng, {endpoint_or_throw(api_listen, "--api-listen"), cli::read_token(api_token_file)});
    api.start();
    std::cout << "sentinel-engine: " << hosts << " hosts, " << services << " services" << std::endl;
    std::cout << "sentinel-engine: api on port " << api.port() << std::endl;

    std::unique_ptr<passive::Gateway> gw;
    if (!gateway_listen.empty()) {
      passive::GatewayOptions go;
      go.listen = endpoint_or_throw(gateway_listen, "--gateway-listen");
      go.token = cli::read_token(gateway_token_file);
      go.skew = Seconds(skew);
      gw = std::make_unique<passive::Gateway>(go, eng.sink(), &eng.audit());
      gw->start();
      std::cout << "sentinel-engine: gateway on port " << gw->port() << std::endl;
    }

    int sig = cli::wait_for_stop_signal(sigs);
    std::cout << "sentinel-engine: signal " << sig << ", stopping" << std::endl;
    if (gw) gw->stop();
    api.stop();
    eng.stop();
    auto c = eng.counters();
    std::cout << "sentinel-engine: results " << c.results << " (active " << c.active_results << ", passive "
              << c.passive_results << "), rejected " << c.rejected_results << ", notifications "
              << c.notifications << std::endl;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sentinel-engine: " << e.what() << "\n";
    return 2;
  }
}
