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

#include "sentinel/notify.hpp"

#include <algorithm>
#include <sstream>

#include "sentinel/process.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::notify {

using state::EventKind;

NotificationPolicy NotificationPolicy::from(const objconf::ServiceDef& def) {
  return {def.notification_options, def.notification_interval, def.notification_period, def.contact_groups, false};
}

NotificationPolicy NotificationPolicy::from(const objconf::HostDef& def) {
  return {def.notification_options, def.notification_interval, def.notification_period, def.contact_groups, true};
}

std::vector<std::string> effective_contact_groups(const objconf::ResolvedConfig& config, const ObjectKey& key) {
  std::vector<std::string> out;
  auto add = [&](const std::vector<std::string>& groups) {
    for (const auto& g : groups) {
      if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    }
  };
  if (!key.is_host()) {
    if (const auto* svc = config.find_service(key); svc && !svc->contact_groups.empty()) {
      add(svc->contact_groups);
      return out;
    }
  }
  if (const auto* host = config.find_host(key.host)) add(host->contact_groups);
  for (const auto& hg : config.hostgroups_of(key.host)) {
    if (auto it = config.hostgroups.find(hg); it != config.hostgroups.end()) add(it->second.contact_groups);
  }
  return out;
}

bool in_period(const objconf::TimePeriodDef& period, TimePoint at, const TimeZone& zone) {
  return period.contains(at, zone);
}

char option_letter(const state::StateEvent& event) {
  if (event.kind == EventKind::Recovery) return 'r';
  if (event.kind != EventKind::Problem && event.kind != EventKind::RenotifyEligible) return 0;
  if (const auto* s = std::get_if<CheckStatus>(&event.status)) {
    switch (*s) {
      case CheckStatus::Warning: return 'w';
      case CheckStatus::Unknown: return 'u';
      case CheckStatus::Critical: return 'c';
      case CheckStatus::Ok: return 0;
    }
  }
  if (const auto* h = std::get_if<HostStatus>(&event.status)) {
    switch (*h) {
      case HostStatus::Down: return 'd';
      case HostStatus::Unreachable: return 'u';
      case HostStatus::Up: return 0;
    }
  }
  return 0;
}

Decision should_notify(const state::StateEvent& event, const NotificationPolicy& policy,
                       const state::MonitorState& st, const PeriodTable& periods, TimePoint now,
                       Seconds interval_length, const TimeZone& zone, AuditLog* audit) {
  char letter = option_letter(event);
  if (letter == 0) return {false, "not a notification event"};
  if (!policy.options.has(letter)) return {false, std::string("option ") + letter + " disabled"};

  auto period = periods.find(policy.notification_period);
  if (period == periods.end()) {
    if (audit) {
      audit->record("notify", event.target.str() + ": unknown period '" + policy.notification_period + "'");
    }
    return {false, "unknown period"};
  }
  if (!in_period(period->second, now, zone)) return {false, "outside period"};

  if (event.kind != EventKind::Recovery && st.acknowledged) return {false, "acknowledged"};
  if (state::in_downtime(st, now)) return {false, "in downtime"};

  if (event.kind == EventKind::RenotifyEligible) {
    if (st.last_notification) {
      if (policy.notification_interval <= 0) return {false, "renotification disabled"};
      if (now - *st.last_notification < interval_length * policy.notification_interval)
        return {false, "renotify interval not elapsed"};
    }
  }
  return {true, ""};
}

NotificationMessage make_message(const state::StateEvent& event, const objconf::ResolvedConfig& config,
                                 std::vector<std::string> recipients) {
  NotificationMessage m;
  m.notification_type = event.kind == EventKind::Recovery ? "RECOVERY" : "PROBLEM";
  if (!event.target.is_host()) m.service_description = event.target.service;
  if (const auto* host = config.find_host(event.target.host)) {
    m.host_alias = host->alias.empty() ? host->host_name : host->alias;
    m.address = host->address;
  } else {
    m.host_alias = event.target.host;
  }
  m.state = std::string(to_string(event.status));
  m.at = event.at;
  m.additional_info = event.output;
  m.recipients = std::move(recipients);
  return m;
}

std::string render_message(const NotificationMessage& msg, const std::string& engine_name,
                           const std::string& version, const TimeZone& zone) {
  std::ostringstream os;
  os << "***** " << engine_name << ' ' << version << " *****\n";
  os << "Notification Type: " << msg.notification_type << '\n';
  if (msg.service_description) os << "Service: " << *msg.service_description << '\n';
  os << "Host: " << msg.host_alias << '\n';
  os << "Address: " << msg.address << '\n';
  os << "State: " << msg.state << '\n';
  os << "Date/Time: " << format_ctime_style(msg.at, zone) << '\n';
  os << "Additional Info: " << msg.additional_info << '\n';
  return os.str();
}

std::string expand_channel_command(const std::string& command_line, const NotificationMessage& msg,
                                   const TimeZone& zone) {
  const std::pair<std::string_view, std::string> macros[] = {
      {"$NOTIFICATIONTYPE$", msg.notification_type},
      {"$SERVICEDESC$", msg.service_description.value_or("")},
      {"$HOSTALIAS$", msg.host_alias},
      {"$HOSTADDRESS$", msg.address},
      {"$SERVICESTATE$", msg.state},
      {"$DATETIME$", format_ctime_style(msg.at, zone)},
      {"$OUTPUT$", msg.additional_info},
  };
  std::string out;
  out.reserve(command_line.size());
  for (std::size_t i = 0; i < command_line.size();) {
    bool matched = false;
    if (command_line[i] == '$') {
      for (const auto& [name, value] : macros) {
        if (command_line.compare(i, name.size(), name) == 0) {
          out += shell_quote(value);
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += command_line[i++];
  }
  return out;
}

std::string format_dispatch_line(const DispatchRecord& r) {
  std::string status = r.ok ? "OK" : "FAILED";
  if (!r.ok) {
    if (!r.error.empty()) status += " (" + r.error + ")";
    else status += " (exit " + std::to_string(r.exit_code) + ")";
  }
  return format_iso8601(r.at) + " " + r.group + " " + r.channel + " " + status;
}

DispatchRecord dispatch(const NotificationMessage& msg, const std::string& group, const std::string& channel,
                        const std::string& command_line, const DispatchOptions& options) {
  DispatchRecord rec;
  rec.group = group;
  rec.channel = channel;
  ProcessSpec spec;
  spec.argv = {"/bin/sh", "-c", expand_channel_command(command_line, msg, options.zone)};
  spec.stdin_data = render_message(msg, options.engine_name, options.version, options.zone);
  spec.timeout = options.timeout;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    rec.attempts = attempt;
    auto outcome = run_process(spec);
    rec.at = Clock::now();
    switch (outcome.kind) {
      case ProcessOutcome::Kind::Exited:
        rec.exit_code = outcome.exit_code;
        rec.ok = outcome.exit_code == 0;
        rec.error.clear();
        break;
      case ProcessOutcome::Kind::TimedOut:
        rec.error = "timed out";
        break;
      case ProcessOutcome::Kind::Signaled:
        rec.error = "killed by signal " + std::to_string(outcome.signal);
        break;
      case ProcessOutcome::Kind::SpawnFailed:
        rec.error = outcome.error;
        break;
    }
    if (rec.ok) break;
  }
  return rec;
}

DispatchPool::DispatchPool(DispatchOptions options, std::size_t workers, LineLog* log, AuditLog* audit)
    : options_(std::move(options)), log_(log), audit_(audit) {
  workers = std::max<std::size_t>(workers, 1);
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
}

DispatchPool::~DispatchPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void DispatchPool::submit(Job job) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(job));
  }
  cv_.notify_one();
}

void DispatchPool::drain() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && busy_ == 0; });
}

std::vector<DispatchRecord> DispatchPool::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

void DispatchPool::run() {
  while (true) {
    Job job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;  // stopping with nothing left
      job = std::move(queue_.front());
      queue_.pop_front();
      ++busy_;
    }
    auto rec = dispatch(job.msg, job.group, job.channel, job.command_line, options_);
    if (log_) log_->append(format_dispatch_line(rec));
    if (!rec.ok && audit_) {
      audit_->record("notify", "dispatch to " + rec.group + " via " + rec.channel + " failed after " +
                                   std::to_string(rec.attempts) + " attempts");
    }
    {
      std::lock_guard lock(mu_);
      records_.push_back(std::move(rec));
      if (records_.size() > 10000) records_.erase(records_.begin(), records_.begin() + 1000);
      --busy_;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace sentinel::notify
