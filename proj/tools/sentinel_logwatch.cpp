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

// sentinel-logwatch: follows log files and forwards rule matches to a gateway.

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "sentinel/passive.hpp"

using namespace sentinel;

int main(int argc, char** argv) {
  CLI::App app("sentinel-logwatch: log lines to passive results");
  std::string rules_file, gateway, token_file, audit_file;
  std::vector<std::string> files;
  int poll_ms = 200;
  std::size_t buffer = 10000;
  bool from_start = false;
  app.add_option("--rules", rules_file, "rules: <state>;<service>;<host-or-$N>;<pattern>")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--gateway", gateway, "gateway address:port")->required();
  app.add_option("--token-file", token_file, "gateway AUTH token")->check(CLI::ExistingFile);
  app.add_option("--poll-ms", poll_ms, "poll interval in milliseconds");
  app.add_option("--buffer", buffer, "results held while the gateway is down");
  app.add_flag("--from-start", from_start, "read existing file content too");
  app.add_option("--audit-log", audit_file, "audit log file");
  app.add_option("logfiles", files, "files to follow")->required();
  CLI11_PARSE(app, argc, argv);

  auto sigs = cli::block_stop_signals();
  try {
    auto ep = net::Endpoint::parse(gateway);
    if (!ep) throw std::runtime_error("bad --gateway address '" + gateway + "'");
    auto audit = audit_file.empty() ? std::make_unique<AuditLog>() : std::make_unique<AuditLog>(audit_file);

    passive::LogWatchOptions opts;
    opts.rules = passive::parse_rules(cli::slurp(rules_file));
    opts.files.assign(files.begin(), files.end());
    opts.poll_interval = std::chrono::milliseconds(poll_ms);
    opts.buffer_limit = buffer;
    opts.from_start = from_start;

    passive::GatewayClient client(*ep, cli::read_token(token_file));
    std::uint64_t sent = 0;
    passive::LogWatcher watcher(
        opts,
        [&](const passive::PassiveResultLine& line) {
          auto reply = client.submit(line);
          if (!reply) return false;
          if (*reply != "OK") audit->record("logwatch", "gateway refused " + line.key().str() + ": " + *reply);
          ++sent;
          return true;
        },
        audit.get());
    watcher.start();
    std::cerr << "sentinel-logwatch: following " << files.size() << " file(s), " << opts.rules.size() << " rule(s)"
              << std::endl;
    cli::wait_for_stop_signal(sigs);
    watcher.stop();
    std::cerr << "sentinel-logwatch: forwarded " << sent << std::endl;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sentinel-logwatch: " << e.what() << "\n";
    return 2;
  }
}
