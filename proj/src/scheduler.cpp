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

#include "sentinel/scheduler.hpp"

#include <algorithm>
#include <filesystem>

namespace sentinel::checkcore {

CheckResult PluginExecutor::run(const CheckJob& job) {
  if (!job.argv.empty() && std::filesystem::path(job.argv[0]).filename() == "sentinel-check") {
    std::span<const std::string> args(job.argv);
    if (auto r = run_builtin_probe(args.subspan(1), job.timeout, ping_)) {
      r->source = job.argv[0];
      return *r;
    }
  }
  return execute_plugin(job.argv, job.timeout);
}

Scheduler::Scheduler(const objconf::ResolvedConfig& config, std::shared_ptr<CheckExecutor> executor, ResultSink sink,
                     SchedulerOptions options)
    : executor_(std::move(executor)), sink_(std::move(sink)), options_(std::move(options)) {
  if (options_.max_concurrent == 0) options_.max_concurrent = 1;
  objconf::MacroContext macros{options_.plugin_dir};

  auto find_period = [&](const std::string& name) -> const objconf::TimePeriodDef* {
    auto it = config.timeperiods.find(name);
    return it == config.timeperiods.end() ? nullptr : &it->second;
  };
  auto add = [&](const ObjectKey& key, bool enabled, const objconf::CommandRef& command, int normal, int retry,
                 int max_attempts, const std::string& period) {
    if (!enabled || command.name.empty()) return;
    if (!options_.only.empty() && !options_.only.count(key)) return;
    Entry e;
    e.schedule.target = key;
    e.job.key = key;
    e.job.argv = objconf::build_check_argv(config, key, macros);
    e.job.timeout = options_.check_timeout;
    if (e.job.argv.empty()) return;
    e.normal_interval = std::max(normal, 1);
    e.retry_interval = std::max(retry, 1);
    e.max_attempts = std::max(max_attempts, 1);
    e.period = find_period(period);
    entries_.emplace(key, std::move(e));
  };

  for (const auto& [name, host] : config.hosts) {
    add(ObjectKey::for_host(name), host.active_checks_enabled, host.check_command, host.normal_check_interval,
        host.retry_check_interval, host.max_check_attempts, host.check_period);
  }
  for (const auto& [key, svc] : config.services) {
    add(key, svc.active_checks_enabled, svc.check_command, svc.normal_check_interval, svc.retry_check_interval,
        svc.max_check_attempts, svc.check_period);
  }
}

Scheduler::~Scheduler() { stop(); }

void Scheduler::start() {
  std::lock_guard lock(mu_);
  if (started_) return;
  started_ = true;
  auto now = Clock::now();
  const auto n = entries_.size();
  std::size_t i = 0;
  for (auto& [key, e] : entries_) {
    std::chrono::microseconds offset{0};
    if (options_.stagger && n > 0) {
      auto span = std::chrono::duration_cast<std::chrono::microseconds>(options_.interval_length * e.normal_interval);
      offset = span * static_cast<long long>(i) / static_cast<long long>(n);
    }
    e.schedule.next_due = now + std::chrono::duration_cast<Clock::duration>(offset);
    due_.emplace(e.schedule.next_due, key);
    ++i;
  }
  dispatcher_ = std::thread([this] { dispatch_loop(); });
  for (std::size_t w = 0; w < options_.max_concurrent; ++w) workers_.emplace_back([this] { worker_loop(); });
}

void Scheduler::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || !started_) {
      stopping_ = true;
      return;
    }
    stopping_ = true;
  }
  due_cv_.notify_all();
  work_cv_.notify_all();
  if (dispatcher_.joinable()) dispatcher_.join();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
}

bool Scheduler::force(const ObjectKey& key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return false;
  auto& e = it->second;
  if (e.running) {
    e.forced = true;
    return true;
  }
  for (auto d = due_.begin(); d != due_.end(); ++d) {
    if (d->second == key) {
      due_.erase(d);
      break;
    }
  }
  // An entry already handed to the ready queue is due anyway.
  if (std::find(ready_.begin() + static_cast<std::ptrdiff_t>(ready_head_), ready_.end(), key) != ready_.end())
    return true;
  e.schedule.next_due = Clock::now();
  due_.emplace(e.schedule.next_due, key);
  due_cv_.notify_all();
  return true;
}

void Scheduler::dispatch_loop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (due_.empty()) {
      due_cv_.wait(lock);
      continue;
    }
    auto next = due_.begin()->first;
    auto now = Clock::now();
    if (next > now) {
      due_cv_.wait_until(lock, next);
      continue;
    }
    auto key = due_.begin()->second;
    due_.erase(due_.begin());
    auto& e = entries_.at(key);
    if (e.period && !e.period->contains(now, options_.zone)) {
      ++skipped_;
      e.schedule.next_due = now + options_.interval_length * e.normal_interval;
      due_.emplace(e.schedule.next_due, key);
      continue;
    }
    e.running = true;
    ++e.dispatches;
    ++dispatched_;
    ready_.push_back(key);
    work_cv_.notify_one();
  }
}

void Scheduler::worker_loop() {
  while (true) {
    CheckJob job;
    {
      std::unique_lock lock(mu_);
      work_cv_.wait(lock, [&] { return stopping_ || ready_head_ < ready_.size(); });
      if (stopping_) return;
      job = entries_.at(ready_[ready_head_++]).job;
      if (ready_head_ == ready_.size()) {
        ready_.clear();
        ready_head_ = 0;
      }
      ++running_;
      peak_running_ = std::max(peak_running_, running_);
    }
    auto result = executor_->run(job);
    finish(job.key, result);
  }
}

void Scheduler::finish(const ObjectKey& key, const CheckResult& result) {
  {
    std::lock_guard sink_lock(sink_mu_);
    if (sink_) sink_(key, result);
  }
  std::lock_guard lock(mu_);
  --running_;
  ++completed_;
  auto& e = entries_.at(key);
  e.running = false;
  bool ok = result.status == CheckStatus::Ok;
  if (ok) {
    e.hard = true;
    e.attempt = 1;
  } else if (e.last_ok && e.hard) {
    e.attempt = 1;
    e.hard = e.max_attempts <= 1;
  } else if (!e.hard) {
    e.attempt = std::min(e.attempt + 1, e.max_attempts);
    e.hard = e.attempt >= e.max_attempts;
  }
  e.last_ok = ok;
  e.schedule.in_retry = !ok && !e.hard;
  auto finished = std::max(result.finished_at, result.started_at);
  if (finished == TimePoint{}) finished = Clock::now();
  e.schedule.next_due = e.forced ? Clock::now()
                                 : next_check_time(e.schedule.in_retry, e.normal_interval, e.retry_interval,
                                                   finished, options_.interval_length);
  e.forced = false;
  if (!stopping_) {
    due_.emplace(e.schedule.next_due, key);
    due_cv_.notify_all();
  }
}

SchedulerStats Scheduler::stats() const {
  std::lock_guard lock(mu_);
  SchedulerStats s;
  s.dispatched = dispatched_;
  s.completed = completed_;
  s.skipped_out_of_period = skipped_;
  s.entries = entries_.size();
  s.running = running_;
  s.waiting = ready_.size() - ready_head_;
  s.peak_running = peak_running_;
  s.saturated = s.waiting > 0;
  return s;
}

std::vector<ScheduleEntry> Scheduler::entries() const {
  std::lock_guard lock(mu_);
  std::vector<ScheduleEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(e.schedule);
  return out;
}

std::uint64_t Scheduler::dispatch_count(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.dispatches;
}

}  // namespace sentinel::checkcore
