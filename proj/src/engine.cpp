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

#include "sentinel/engine.hpp"

#include <algorithm>

namespace sentinel::engine {

using state::EventKind;
using state::MonitorState;

namespace {

std::unique_ptr<LineLog> open_log(const std::optional<std::filesystem::path>& file) {
  return file ? std::make_unique<LineLog>(*file) : std::make_unique<LineLog>();
}

std::unique_ptr<AuditLog> open_audit(const std::optional<std::filesystem::path>& file) {
  return file ? std::make_unique<AuditLog>(*file) : std::make_unique<AuditLog>();
}

}  // namespace

Engine::Engine(objconf::ResolvedConfig config, EngineOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  periods_ = config_.timeperiods;
  periods_.emplace("24x7", objconf::TimePeriodDef::always());
  for (const auto& [name, host] : config_.hosts) {
    parents_[name] = host.parents;
    states_[ObjectKey::for_host(name)] = MonitorState::initial_host();
    host_passed_[name] = true;
  }
  for (const auto& [key, svc] : config_.services) states_[key] = MonitorState::initial_service();
  events_ = open_log(options_.event_log_file);
  audit_ = open_audit(options_.audit_log_file);
  dispatch_log_ = open_log(options_.dispatch_log_file);
}

Engine::~Engine() { stop(); }

void Engine::start() {
  if (started_) return;
  started_ = true;

  if (options_.retention_file) {
    auto load = store::read_retention(*options_.retention_file, config_, audit_.get());
    for (auto& [key, s] : load.states) {
      if (key.is_host()) host_passed_[key.host] = s.current_status == ObjectStatus(HostStatus::Up);
      states_[key] = std::move(s);
    }
    if (!load.cold_start) {
      audit_->record("engine", "restored " + std::to_string(load.states.size()) + " objects from retention");
    }
  }
  if (options_.notifications) {
    dispatch_ = std::make_unique<notify::DispatchPool>(options_.dispatch, options_.dispatch_workers,
                                                       dispatch_log_.get(), audit_.get());
  }
  if (options_.status_dir) status_writer_ = std::make_unique<store::StatusWriter>(*options_.status_dir, audit_.get());

  {
    std::lock_guard lock(queue_mu_);
    accepting_ = true;
    stopping_ = false;
  }
  state_thread_ = std::thread([this] { state_loop(); });
  house_thread_ = std::thread([this] { housekeeping_loop(); });

  if (options_.active_checks) {
    auto executor = options_.executor ? options_.executor : std::make_shared<checkcore::PluginExecutor>();
    checkcore::SchedulerOptions so;
    so.interval_length = options_.interval_length;
    so.max_concurrent = options_.max_concurrent;
    so.check_timeout = options_.check_timeout;
    so.plugin_dir = options_.plugin_dir;
    so.zone = options_.zone;
    so.stagger = options_.stagger;
    scheduler_ = std::make_unique<checkcore::Scheduler>(
        config_, executor, [this](const ObjectKey& k, const CheckResult& r) { submit(k, r); }, so);
    scheduler_->start();
  }
}

void Engine::stop() {
  if (!started_) return;
  started_ = false;
  if (scheduler_) scheduler_->stop();
  {
    std::lock_guard lock(house_mu_);
    house_stop_ = true;
  }
  house_cv_.notify_all();
  if (house_thread_.joinable()) house_thread_.join();
  {
    std::lock_guard lock(queue_mu_);
    accepting_ = false;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (state_thread_.joinable()) state_thread_.join();
  persist();
  dispatch_.reset();  // finishes queued dispatches
}

bool Engine::known(const ObjectKey& key) const {
  return key.is_host() ? config_.find_host(key.host) != nullptr : config_.find_service(key) != nullptr;
}

void Engine::post(Task task) {
  {
    std::lock_guard lock(queue_mu_);
    if (accepting_) {
      queue_.push_back(std::move(task));
      queue_cv_.notify_one();
      return;
    }
  }
  // No state thread: the caller stands in for it.
  task();
}

template <typename R>
R Engine::call(std::function<R()> fn) {
  auto promise = std::make_shared<std::promise<R>>();
  auto future = promise->get_future();
  post([promise, fn = std::move(fn)] {
    try {
      promise->set_value(fn());
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  });
  return future.get();
}

void Engine::state_loop() {
  while (true) {
    std::deque<Task> batch;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      batch.swap(queue_);
    }
    for (auto& task : batch) task();
  }
}

void Engine::housekeeping_loop() {
  auto next_status = std::chrono::steady_clock::now() + options_.status_interval;
  auto next_tick = std::chrono::steady_clock::now() + options_.tick;
  std::unique_lock lock(house_mu_);
  while (!house_stop_) {
    house_cv_.wait_until(lock, std::min(next_status, next_tick), [&] { return house_stop_; });
    if (house_stop_) break;
    auto now = std::chrono::steady_clock::now();
    lock.unlock();
    if (now >= next_tick) {
      next_tick = now + options_.tick;
      post([this] { tick(Clock::now()); });
    }
    if (now >= next_status) {
      next_status = now + options_.status_interval;
      persist();
    }
    lock.lock();
  }
}

void Engine::submit(const ObjectKey& key, CheckResult result) {
  post([this, key, result = std::move(result)] { apply(key, result); });
}

passive::ResultSink Engine::sink() {
  return [this](const ObjectKey& k, const CheckResult& r) { submit(k, r); };
}

void Engine::apply(const ObjectKey& key, const CheckResult& result) {
  const auto now = Clock::now();
  auto it = states_.find(key);
  if (it == states_.end()) {
    audit_->record("engine", "result for unknown object " + key.str() + " from " +
                                 (result.source.empty() ? std::string("unknown source") : result.source));
    std::unique_lock lock(state_mu_);
    ++counters_.rejected_results;
    return;
  }
  const MonitorState before = it->second;
  state::Transition t;
  bool host_passed = false;
  if (key.is_host()) {
    const auto& def = *config_.find_host(key.host);
    host_passed = result.status == CheckStatus::Ok;
    auto passed = host_passed_;
    passed[key.host] = host_passed;
    auto reach = state::host_reachability(passed, parents_);
    t = state::apply_host_result(before, state::TransitionRules::from(def), key, reach.at(key.host), result, now,
                                 audit_.get());
  } else {
    const auto& def = *config_.find_service(key);
    t = state::apply_result(before, state::TransitionRules::from(def), key, result, now, audit_.get());
  }
  {
    std::unique_lock lock(state_mu_);
    if (t.rejected) {
      ++counters_.rejected_results;
      return;
    }
    it->second = t.state;
    if (key.is_host()) host_passed_[key.host] = host_passed;
    ++counters_.results;
    ++(result.origin == Origin::Passive ? counters_.passive_results : counters_.active_results);
    counters_.events += t.events.size();
  }
  for (const auto& e : t.events) {
    events_->append(state::format_event_line(e));
    notify_event(e, now);
  }
  // A failing service prompts a look at its host.
  if (!key.is_host() && scheduler_ && is_ok(before.current_status) && !is_ok(t.state.current_status)) {
    scheduler_->force(ObjectKey::for_host(key.host));
  }
}

void Engine::notify_event(const state::StateEvent& event, TimePoint now) {
  if (!dispatch_ || notify::option_letter(event) == 0) return;
  const auto& key = event.target;
  notify::NotificationPolicy policy;
  if (key.is_host()) {
    policy = notify::NotificationPolicy::from(*config_.find_host(key.host));
  } else {
    policy = notify::NotificationPolicy::from(*config_.find_service(key));
  }
  const bool counted = event.kind != EventKind::RenotifyEligible;
  auto suppress = [&] {
    if (!counted) return;
    std::unique_lock lock(state_mu_);
    ++counters_.suppressed;
  };

  // Service problems on a host that is itself down or unreachable stay quiet.
  if (!key.is_host() && event.kind != EventKind::Recovery) {
    const auto& host_state = states_.at(ObjectKey::for_host(key.host));
    if (host_state.hard_problem()) {
      suppress();
      return;
    }
  }

  const auto& st = states_.at(key);
  bool sent = false;
  for (const auto& group : notify::effective_contact_groups(config_, key)) {
    auto cg = config_.contactgroups.find(group);
    if (cg == config_.contactgroups.end()) continue;
    for (const auto& channel : cg->second.channels) {
      auto p = policy;
      if (channel.period) p.notification_period = *channel.period;
      auto d = notify::should_notify(event, p, st, periods_, now, options_.interval_length, options_.zone,
                                     audit_.get());
      if (!d.notify) continue;
      auto cmd = config_.commands.find(channel.command);
      if (cmd == config_.commands.end()) {
        audit_->record("notify", "channel command '" + channel.command + "' of group " + group + " is undefined");
        continue;
      }
      dispatch_->submit({notify::make_message(event, config_, {group}), group, channel.command,
                         cmd->second.command_line});
      sent = true;
      std::unique_lock lock(state_mu_);
      ++counters_.notifications;
    }
  }
  if (!sent) {
    suppress();
    return;
  }
  if (event.kind != EventKind::Recovery) {
    std::unique_lock lock(state_mu_);
    states_.at(key).last_notification = now;
  }
}

void Engine::tick(TimePoint now) {
  for (auto& [key, st] : states_) {
    if (!st.downtimes.empty() && std::any_of(st.downtimes.begin(), st.downtimes.end(),
                                             [&](const state::Downtime& d) { return d.end <= now; })) {
      std::unique_lock lock(state_mu_);
      state::prune_downtimes(st, now);
    }
    if (auto ev = state::renotify_tick(st, key, now)) notify_event(*ev, now);
  }
}

CommandResult Engine::submit_passive(const passive::PassiveResultLine& line, const std::string& source) {
  if (auto why = passive::invalid_reason(line)) return {CommandStatus::Invalid, *why};
  auto key = line.key();
  if (!known(key)) return {CommandStatus::NotFound, "unknown object " + key.str()};
  bool passive_ok = key.is_host() ? config_.find_host(key.host)->passive_checks_enabled
                                  : config_.find_service(key)->passive_checks_enabled;
  if (!passive_ok) {
    audit_->record("engine", "rejected passive result for " + key.str() + " from " + source +
                                 ": passive checks disabled");
    return {CommandStatus::Conflict, "passive checks are disabled for " + key.str()};
  }
  auto at = passive::trusted_time(line.received_at, Clock::now(), options_.passive_skew, audit_.get(), source);
  auto result = passive::to_check_result(line, at, source);
  call<int>([&] {
    apply(key, result);
    return 0;
  });
  return {};
}

CommandResult Engine::acknowledge(const ObjectKey& key, const std::string& who, const std::string& comment) {
  if (!known(key)) return {CommandStatus::NotFound, "unknown object " + key.str()};
  return call<CommandResult>([&]() -> CommandResult {
    try {
      auto s = state::acknowledge(states_.at(key), who, comment, Clock::now(), audit_.get(), &key);
      std::unique_lock lock(state_mu_);
      states_.at(key) = std::move(s);
      return {};
    } catch (const state::StateError& e) {
      return {CommandStatus::Conflict, e.what()};
    }
  });
}

CommandResult Engine::add_downtime(const ObjectKey& key, TimePoint start, TimePoint end, const std::string& author,
                                   const std::string& comment) {
  if (end <= start) return {CommandStatus::Invalid, "downtime end must be after its start"};
  if (!known(key)) return {CommandStatus::NotFound, "unknown object " + key.str()};
  return call<CommandResult>([&]() -> CommandResult {
    auto s = state::add_downtime(states_.at(key), {start, end, author, comment});
    {
      std::unique_lock lock(state_mu_);
      states_.at(key) = std::move(s);
    }
    audit_->record("engine", "downtime for " + key.str() + " from " + format_iso8601(start) + " to " +
                                 format_iso8601(end) + " by " + (author.empty() ? "unknown" : author));
    return {};
  });
}

CommandResult Engine::force_check(const ObjectKey& key) {
  if (!known(key)) return {CommandStatus::NotFound, "unknown object " + key.str()};
  bool active = key.is_host() ? config_.find_host(key.host)->active_checks_enabled
                              : config_.find_service(key)->active_checks_enabled;
  if (!active) return {CommandStatus::Conflict, key.str() + " is passive-only"};
  if (!scheduler_) return {CommandStatus::Conflict, "active checks are not run by this engine"};
  if (!scheduler_->force(key)) return {CommandStatus::Conflict, key.str() + " has no check command"};
  return {};
}

void Engine::flush() {
  call<int>([] { return 0; });
}

EngineSnapshot Engine::snapshot() const {
  EngineSnapshot snap;
  snap.taken_at = Clock::now();
  std::shared_lock lock(state_mu_);
  snap.objects.reserve(states_.size());
  for (const auto& [key, st] : states_) {
    ObjectView v;
    v.key = key;
    v.state = st;
    v.in_downtime = state::in_downtime(st, snap.taken_at);
    if (key.is_host()) {
      const auto& def = *config_.find_host(key.host);
      v.max_attempts = std::max(def.max_check_attempts, 1);
      v.active_checks = def.active_checks_enabled && !def.check_command.empty();
    } else {
      const auto& def = *config_.find_service(key);
      v.max_attempts = std::max(def.max_check_attempts, 1);
      v.active_checks = def.active_checks_enabled && !def.check_command.empty();
    }
    snap.objects.push_back(std::move(v));
  }
  return snap;
}

std::optional<MonitorState> Engine::state_of(const ObjectKey& key) const {
  std::shared_lock lock(state_mu_);
  auto it = states_.find(key);
  if (it == states_.end()) return std::nullopt;
  return it->second;
}

EngineCounters Engine::counters() const {
  std::shared_lock lock(state_mu_);
  return counters_;
}

std::optional<checkcore::SchedulerStats> Engine::scheduler_stats() const {
  if (!scheduler_) return std::nullopt;
  return scheduler_->stats();
}

store::StatusSnapshot Engine::status_snapshot() const {
  std::shared_lock lock(state_mu_);
  return {Clock::now(), states_};
}

bool Engine::write_status_now() {
  std::lock_guard lock(persist_mu_);
  if (!status_writer_) return false;
  bool ok = status_writer_->write(status_snapshot());
  std::unique_lock slock(state_mu_);
  ++(ok ? counters_.status_writes : counters_.status_write_failures);
  return ok;
}

void Engine::persist() {
  if (status_writer_) write_status_now();
  if (options_.retention_file) {
    std::lock_guard lock(persist_mu_);
    try {
      store::write_retention(status_snapshot().entries, *options_.retention_file);
    } catch (const std::exception& e) {
      audit_->record("engine", std::string("retention write failed: ") + e.what());
    }
  }
}

passive::PassiveResultLine to_wire(const ObjectKey& key, const CheckResult& result) {
  passive::PassiveResultLine line;
  auto at = result.finished_at == TimePoint{} ? Clock::now() : result.finished_at;
  line.received_at = to_epoch_seconds(at);
  line.host = key.host;
  if (key.is_host()) {
    line.kind = passive::ResultKind::Host;
    line.code = result.status == CheckStatus::Ok || result.status == CheckStatus::Warning ? 0 : 1;
  } else {
    line.kind = passive::ResultKind::Service;
    line.service = key.service;
    line.code = static_cast<int>(result.status);
  }
  line.output = result.output;
  std::replace_if(line.output.begin(), line.output.end(), [](char c) { return c == '\t' || c == '\r' || c == '\n'; },
                  ' ');
  return line;
}

}  // namespace sentinel::engine
