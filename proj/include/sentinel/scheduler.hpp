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

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "sentinel/checkcore.hpp"
#include "sentinel/objconf.hpp"

namespace sentinel::checkcore {

struct CheckJob {
  ObjectKey key;
  std::vector<std::string> argv;
  Timeout timeout = kDefaultTimeout;
};

class CheckExecutor {
 public:
  virtual ~CheckExecutor() = default;
  virtual CheckResult run(const CheckJob& job) = 0;
};

/// Runs argv as a plugin, or in-process when argv[0] is named `sentinel-check`.
class PluginExecutor : public CheckExecutor {
 public:
  explicit PluginExecutor(PingOptions ping = {}) : ping_(std::move(ping)) {}
  CheckResult run(const CheckJob& job) override;

 private:
  PingOptions ping_;
};

struct SchedulerOptions {
  Seconds interval_length{60};
  std::size_t max_concurrent = 32;
  Timeout check_timeout = kDefaultTimeout;
  std::string plugin_dir;
  TimeZone zone = TimeZone::local();
  bool stagger = true;
  /// Restricts scheduling to these objects (a worker's share); empty means all.
  std::set<ObjectKey> only;
};

struct SchedulerStats {
  std::uint64_t dispatched = 0;
  std::uint64_t completed = 0;
  std::uint64_t skipped_out_of_period = 0;
  std::size_t entries = 0;
  std::size_t running = 0;
  std::size_t waiting = 0;  // due but no free slot
  std::size_t peak_running = 0;
  bool saturated = false;
};

using ResultSink = std::function<void(const ObjectKey&, const CheckResult&)>;

/// Owns the due-queue for every active check in a config. Results are handed
/// to the sink one at a time, in completion order.
class Scheduler {
 public:
  Scheduler(const objconf::ResolvedConfig& config, std::shared_ptr<CheckExecutor> executor, ResultSink sink,
            SchedulerOptions options = {});
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  void start();
  void stop();

  /// Makes an entry due now. False if the object is not scheduled.
  bool force(const ObjectKey& key);

  SchedulerStats stats() const;
  std::vector<ScheduleEntry> entries() const;
  std::uint64_t dispatch_count(const ObjectKey& key) const;

 private:
  struct Entry {
    ScheduleEntry schedule;
    CheckJob job;
    int normal_interval = 1;
    int retry_interval = 1;
    int max_attempts = 1;
    const objconf::TimePeriodDef* period = nullptr;
    // Minimal soft/hard tracking to choose the retry interval.
    bool last_ok = true;
    bool hard = true;
    int attempt = 1;
    bool running = false;
    bool forced = false;
    std::uint64_t dispatches = 0;
  };

  void dispatch_loop();
  void worker_loop();
  void finish(const ObjectKey& key, const CheckResult& result);

  std::shared_ptr<CheckExecutor> executor_;
  ResultSink sink_;
  SchedulerOptions options_;

  mutable std::mutex mu_;
  std::condition_variable due_cv_;
  std::condition_variable work_cv_;
  std::map<ObjectKey, Entry> entries_;
  std::multimap<TimePoint, ObjectKey> due_;
  std::vector<ObjectKey> ready_;  // dispatched, awaiting a worker
  std::size_t ready_head_ = 0;
  std::size_t running_ = 0;
  std::size_t peak_running_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t skipped_ = 0;
  bool stopping_ = false;
  bool started_ = false;

  std::mutex sink_mu_;
  std::thread dispatcher_;
  std::vector<std::thread> workers_;
};

}  // namespace sentinel::checkcore
