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

// The central engine: one state thread owns every MonitorState. Check
// results (scheduler, gateway, API) and operator commands are queued to it;
// readers copy under a shared lock.

#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <thread>

#include "sentinel/audit.hpp"
#include "sentinel/notify.hpp"
#include "sentinel/objconf.hpp"
#include "sentinel/passive.hpp"
#include "sentinel/scheduler.hpp"
#include "sentinel/statemachine.hpp"
#include "sentinel/statestore.hpp"

namespace sentinel::engine {

struct EngineOptions {
  Seconds interval_length{60};
  TimeZone zone = TimeZone::local();

  bool active_checks = true;  // false: results only arrive passively (workers)
  std::size_t max_concurrent = 32;
  checkcore::Timeout check_timeout = checkcore::kDefaultTimeout;
  std::string plugin_dir;
  bool stagger = true;
  std::shared_ptr<checkcore::CheckExecutor> executor;  // default: PluginExecutor

  std::optional<std::filesystem::path> status_dir;
  Seconds status_interval{10};
  std::optional<std::filesystem::path> retention_file;

  std::optional<std::filesystem::path> event_log_file;
  std::optional<std::filesystem::path> audit_log_file;
  std::optional<std::filesystem::path> dispatch_log_file;

  bool notifications = true;
  notify::DispatchOptions dispatch;
  std::size_t dispatch_workers = 4;

  /// Cadence of renotification and downtime housekeeping.
  std::chrono::milliseconds tick{1000};

  /// Passive results older or newer than this (by producer stamp) get the receive time.
  Seconds passive_skew{15 * 60};
};

struct EngineCounters {
  std::uint64_t results = 0;  // applied to a MonitorState
  std::uint64_t active_results = 0;
  std::uint64_t passive_results = 0;
  std::uint64_t rejected_results = 0;  // unknown object or passive disabled
  std::uint64_t events = 0;
  std::uint64_t notifications = 0;  // dispatch jobs submitted
  std::uint64_t suppressed = 0;     // notification events stopped by a gate
  std::uint64_t status_writes = 0;
  std::uint64_t status_write_failures = 0;
};

/// Outcome of an operator command.
enum class CommandStatus { Accepted, NotFound, Conflict, Invalid };

struct CommandResult {
  CommandStatus status = CommandStatus::Accepted;
  std::string message;
  bool ok() const { return status == CommandStatus::Accepted; }
};

struct ObjectView {
  ObjectKey key;
  state::MonitorState state;
  int max_attempts = 1;
  bool in_downtime = false;
  bool active_checks = true;
};

/// One consistent copy of every object's state.
struct EngineSnapshot {
  TimePoint taken_at{};
  std::vector<ObjectView> objects;  // hosts and services in key order
};

class Engine {
 public:
  Engine(objconf::ResolvedConfig config, EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Restores retention, starts the state thread, scheduler and status writer.
  void start();
  /// Stops intake, drains queued work, writes final status and retention.
  void stop();

  const objconf::ResolvedConfig& config() const { return config_; }
  const EngineOptions& options() const { return options_; }

  /// Queues a result; never blocks on the state thread.
  void submit(const ObjectKey& key, CheckResult result);
  /// Sink for Gateway / Scheduler.
  passive::ResultSink sink();

  /// Queues a passive wire record after validating it against the config.
  /// Waits until the record has been applied.
  CommandResult submit_passive(const passive::PassiveResultLine& line, const std::string& source);

  CommandResult acknowledge(const ObjectKey& key, const std::string& who, const std::string& comment);
  CommandResult add_downtime(const ObjectKey& key, TimePoint start, TimePoint end, const std::string& author,
                             const std::string& comment);
  CommandResult force_check(const ObjectKey& key);

  /// Blocks until everything queued before the call has been applied.
  void flush();

  EngineSnapshot snapshot() const;
  std::optional<state::MonitorState> state_of(const ObjectKey& key) const;
  EngineCounters counters() const;
  std::optional<checkcore::SchedulerStats> scheduler_stats() const;

  LineLog& event_log() { return *events_; }
  AuditLog& audit() { return *audit_; }
  LineLog& dispatch_log() { return *dispatch_log_; }
  /// Notification pool; drain() it before inspecting dispatch records.
  notify::DispatchPool* dispatcher() { return dispatch_.get(); }

  /// Writes status.dat now (also done every status_interval). False on failure.
  bool write_status_now();

 private:
  using Task = std::function<void()>;

  bool known(const ObjectKey& key) const;
  void post(Task task);
  template <typename R>
  R call(std::function<R()> fn);

  void state_loop();
  void housekeeping_loop();
  void apply(const ObjectKey& key, const CheckResult& result);
  void notify_event(const state::StateEvent& event, TimePoint now);
  void tick(TimePoint now);
  store::StatusSnapshot status_snapshot() const;
  void persist();

  objconf::ResolvedConfig config_;
  EngineOptions options_;
  notify::PeriodTable periods_;
  std::map<std::string, std::vector<std::string>> parents_;

  std::unique_ptr<LineLog> events_;
  std::unique_ptr<AuditLog> audit_;
  std::unique_ptr<LineLog> dispatch_log_;
  std::unique_ptr<notify::DispatchPool> dispatch_;
  std::unique_ptr<checkcore::Scheduler> scheduler_;
  std::unique_ptr<store::StatusWriter> status_writer_;

  // Owned by the state thread; readers take shared_lock.
  mutable std::shared_mutex state_mu_;
  std::map<ObjectKey, state::MonitorState> states_;
  std::map<std::string, bool> host_passed_;
  EngineCounters counters_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Task> queue_;
  bool accepting_ = false;
  bool stopping_ = false;
  bool started_ = false;
  std::thread state_thread_;

  std::mutex house_mu_;
  std::condition_variable house_cv_;
  bool house_stop_ = false;
  std::thread house_thread_;
  std::mutex persist_mu_;
};

/// Converts a check result to a wire record (workers). Host statuses map
/// OK/WARNING to up (0) and CRITICAL/UNKNOWN to down (1).
passive::PassiveResultLine to_wire(const ObjectKey& key, const CheckResult& result);

}  // namespace sentinel::engine
