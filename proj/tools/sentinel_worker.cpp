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

// sentinel-worker: runs a share of the active checks and forwards each result
// to a gateway. With --worker-count N, worker i takes every N-th scheduled
// object (in key order) starting at i.

#include <signal.h>

#include <CLI11.hpp>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "cli_common.hpp"
#include "sentinel/engine.hpp"

using namespace sentinel;

namespace {

std::set<ObjectKey> share(const objconf::ResolvedConfig& config, int index, int count) {
  std::vector<ObjectKey> all;
  for (const auto& [name, h] : config.hosts) {
    if (h.active_checks_enabled && !h.check_command.empty()) all.push_back(ObjectKey::for_host(name));
  }
  for (const auto& [key, s] : config.services) {
    if (s.active_checks_enabled && !s.check_command.empty()) all.push_back(key);
  }
  std::sort(all.begin(), all.end());
  std::set<ObjectKey> mine;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (static_cast<int>(i % static_cast<std::size_t>(count)) == index) mine.insert(all[i]);
  }
  return mine;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("sentinel-worker: distributed active checks");
  std::string gateway, token_file, journal_file, ping_command = "ping", plugin_dir;
  std::vector<std::string> files;
  int index = 0, count = 1, interval = 60, timeout_s = 10;
  std::size_t max_concurrent = 32, buffer = 10000;
  std::uint64_t limit = 0;
  app.add_option("--gateway", gateway, "gateway address:port")->required();
  app.add_option("--token-file", token_file, "gateway AUTH token")->check(CLI::ExistingFile);
  app.add_option("--worker-index", index, "this worker's share")->check(CLI::NonNegativeNumber);
  app.add_option("--worker-count", count, "number of workers")->check(CLI::PositiveNumber);
  app.add_option("--interval-length", interval, "seconds per interval unit")->check(CLI::PositiveNumber);
  app.add_option("--max-concurrent", max_concurrent, "parallel checks");
  app.add_option("--check-timeout", timeout_s, "plugin timeout in seconds")->check(CLI::PositiveNumber);
  app.add_option("--plugin-dir", plugin_dir, "prefix for relative plugin paths");
  app.add_option("--ping-command", ping_command, "ping executable");
  app.add_option("--buffer", buffer, "results held while the gateway is down");
  app.add_option("--limit", limit, "exit after this many accepted submissions");
  app.add_option("--journal", journal_file, "append each accepted record here");
  app.add_option("configs", files, "object definition files")->required()->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);
  if (index >= count) {
    std::cerr << "sentinel-worker: --worker-index must be below --worker-count\n";
    return 2;
  }

  auto sigs = cli::block_stop_signals();
  try {
    auto ep = net::Endpoint::parse(gateway);
    if (!ep) throw std::runtime_error("bad --gateway address '" + gateway + "'");
    auto config = cli::load_config_or_throw(files);
    std::ofstream journal;
    if (!journal_file.empty()) {
      journal.open(journal_file, std::ios::app);
      if (!journal) throw std::runtime_error("cannot open " + journal_file);
    }

    std::mutex mu;
    std::condition_variable cv;
    std::deque<passive::PassiveResultLine> queue;
    bool closing = false;
    std::atomic<bool> done{false};
    std::uint64_t accepted = 0, refused = 0, dropped = 0;

    passive::GatewayClient client(*ep, cli::read_token(token_file));
    std::thread sender([&] {
      std::unique_lock lock(mu);
      while (true) {
        cv.wait(lock, [&] { return closing || !queue.empty(); });
        if (queue.empty() || done) return;
        auto line = queue.front();
        lock.unlock();
        auto reply = client.submit(line);
        lock.lock();
        if (!reply) {
          if (closing) return;
          cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return closing; });
          continue;
        }
        queue.pop_front();
        if (*reply != "OK") {
          ++refused;
          std::cerr << "sentinel-worker: gateway refused " << line.key().str() << ": " << *reply << std::endl;
          continue;
        }
        ++accepted;
        if (journal.is_open()) journal << passive::encode_line(line) << std::flush;
        if (limit && accepted >= limit) {
          done = true;
          queue.clear();
          return;
        }
      }
    });

    checkcore::SchedulerOptions so;
    so.interval_length = Seconds(interval);
    so.max_concurrent = max_concurrent;
    so.check_timeout = std::chrono::seconds(timeout_s);
    so.plugin_dir = plugin_dir;
    so.only = share(config, index, count);
    const auto objects = so.only.size();
    checkcore::Scheduler scheduler(
        config, std::make_shared<checkcore::PluginExecutor>(checkcore::PingOptions{ping_command}),
        [&](const ObjectKey& key, const CheckResult& r) {
          std::lock_guard lock(mu);
          if (done) return;
          if (queue.size() >= buffer) {
            queue.pop_front();
            ++dropped;
          }
          queue.push_back(engine::to_wire(key, r));
          cv.notify_one();
        },
        so);
    scheduler.start();
    std::cerr << "sentinel-worker " << index << "/" << count << ": " << objects << " object(s)" << std::endl;

    while (!done) {
      timespec ts{0, 100 * 1000 * 1000};
      if (sigtimedwait(&sigs, nullptr, &ts) > 0) break;
    }
    scheduler.stop();
    {
      std::lock_guard lock(mu);
      closing = true;
    }
    cv.notify_all();
    sender.join();
    std::cerr << "sentinel-worker " << index << "/" << count << ": accepted " << accepted << ", refused " << refused
              << ", dropped " << dropped << ", unsent " << queue.size() << std::endl;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sentinel-worker: " << e.what() << "\n";
    return 2;
  }
}
