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

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <random>
#include <set>

#include "notification_fields.hpp"
#include "sentinel/notify.hpp"
#include "sentinel/process.hpp"

using namespace sentinel;
using namespace sentinel::notify;
using namespace std::chrono_literals;
using state::EventKind;
using state::MonitorState;
using state::StateEvent;
using state::StateType;

namespace {

const ObjectKey kSvc = ObjectKey::for_service("www", "IT Web Server");
const TimeZone kMet = TimeZone::fixed("MET", Seconds(3600));
// 2003-03-17 00:00:00 UTC, a Monday.
const TimePoint kMonday = from_epoch_seconds(1047859200);

StateEvent event(EventKind kind, ObjectStatus status, std::string out = "out") {
  return {kind, kSvc, kMonday, status, StateType::Hard, 1, std::move(out)};
}

NotificationPolicy policy(std::string_view letters, int interval = 30, std::string period = "24x7") {
  NotificationPolicy p;
  p.options = *objconf::NotificationOptions::parse(letters, objconf::NotificationOptions::kServiceLetters);
  p.notification_interval = interval;
  p.notification_period = std::move(period);
  p.contact_groups = {"ops"};
  return p;
}

PeriodTable periods() {
  PeriodTable t;
  t.emplace("24x7", objconf::TimePeriodDef::always());
  objconf::TimePeriodDef office;
  office.period_name = "office";
  for (int d = 1; d <= 5; ++d) office.ranges[static_cast<std::size_t>(d)].push_back({8 * 60, 18 * 60});
  t.emplace("office", office);
  objconf::TimePeriodDef never;
  never.period_name = "never";
  t.emplace("never", never);
  return t;
}

MonitorState hard_critical() {
  MonitorState s;
  s.current_status = CheckStatus::Critical;
  s.state_type = StateType::Hard;
  return s;
}

objconf::ResolvedConfig web_config() {
  auto r = objconf::load_text(R"(
define command{
    command_name    check_http
    command_line    /bin/true
}
define command{
    command_name    notify-outbox
    command_line    cat >> $OUTBOX
}
define contactgroup{
    contactgroup_name   ops
    channels            notify-outbox
}
define host{
    host_name       www
    alias           WWW Server WEB
    address         131.169.40.38
    contact_groups  ops
}
define service{
    host_name           www
    service_description IT Web Server
    check_command       check_http
    check_period        24x7
    max_check_attempts  3
}
)");
  return r.config;
}

}  // namespace

TEST_CASE("gate examples") {
  auto p = periods();
  auto s = hard_critical();
  s.current_status = CheckStatus::Warning;
  auto warn = event(EventKind::Problem, CheckStatus::Warning);
  auto d = should_notify(warn, policy("w,u,c,r"), s, p, kMonday);
  CHECK(d.notify);
  CHECK(d.reason.empty());

  auto off = should_notify(warn, policy("c,r"), s, p, kMonday);
  CHECK_FALSE(off.notify);
  CHECK(off.reason == "option w disabled");

  auto crit = hard_critical();
  crit.last_notification = kMonday - 100 * 60s;
  auto renotify = should_notify(event(EventKind::RenotifyEligible, CheckStatus::Critical), policy("w,u,c,r", 2200),
                                crit, p, kMonday, 60s);
  CHECK_FALSE(renotify.notify);
  CHECK(renotify.reason == "renotify interval not elapsed");

  auto night = should_notify(event(EventKind::Problem, CheckStatus::Critical), policy("c", 30, "office"), crit, p,
                             kMonday + 3h, 60s, TimeZone::utc());
  CHECK_FALSE(night.notify);
  CHECK(night.reason == "outside period");
  CHECK(should_notify(event(EventKind::Problem, CheckStatus::Critical), policy("c", 30, "office"), crit, p,
                      kMonday + 9h, 60s, TimeZone::utc())
            .notify);

  AuditLog audit;
  auto unknown = should_notify(warn, policy("w", 30, "holidays"), s, p, kMonday, 60s, TimeZone::utc(), &audit);
  CHECK(unknown.reason == "unknown period");
  CHECK(audit.contains("unknown period 'holidays'"));

  CHECK(should_notify(event(EventKind::StateLog, CheckStatus::Critical), policy("w,u,c,r"), crit, p, kMonday)
            .reason == "not a notification event");
  CHECK(should_notify(warn, policy("n"), s, p, kMonday).reason == "option w disabled");
}

TEST_CASE("ack and downtime gates") {
  auto p = periods();
  auto s = state::acknowledge(hard_critical(), "ops", "", kMonday);
  CHECK(should_notify(event(EventKind::Problem, CheckStatus::Critical), policy("c,r"), s, p, kMonday).reason ==
        "acknowledged");
  CHECK(should_notify(event(EventKind::RenotifyEligible, CheckStatus::Critical), policy("c,r"), s, p, kMonday)
            .reason == "acknowledged");
  CHECK(should_notify(event(EventKind::Recovery, CheckStatus::Ok), policy("c,r"), s, p, kMonday).notify);

  auto dt = state::add_downtime(hard_critical(), {kMonday, kMonday + 1h, "", ""});
  CHECK(should_notify(event(EventKind::Problem, CheckStatus::Critical), policy("c,r"), dt, p, kMonday + 1min)
            .reason == "in downtime");
  CHECK(should_notify(event(EventKind::Problem, CheckStatus::Critical), policy("c,r"), dt, p, kMonday + 1h).notify);
}

TEST_CASE("host events use d,u,r") {
  auto p = periods();
  NotificationPolicy hp;
  hp.is_host = true;
  hp.options = *objconf::NotificationOptions::parse("d,r", objconf::NotificationOptions::kHostLetters);
  MonitorState s;
  s.current_status = HostStatus::Down;
  StateEvent down{EventKind::Problem, ObjectKey::for_host("h"), kMonday, HostStatus::Down, StateType::Hard, 1, ""};
  CHECK(should_notify(down, hp, s, p, kMonday).notify);
  down.status = HostStatus::Unreachable;
  CHECK(should_notify(down, hp, s, p, kMonday).reason == "option u disabled");
}

TEST_CASE("in_period is half-open per weekday") {
  auto p = periods();
  const auto& office = p.at("office");
  auto utc = TimeZone::utc();
  CHECK_FALSE(in_period(office, kMonday + 7h + 59min, utc));
  CHECK(in_period(office, kMonday + 8h, utc));
  CHECK(in_period(office, kMonday + 17h + 59min, utc));
  CHECK_FALSE(in_period(office, kMonday + 18h, utc));
  CHECK_FALSE(in_period(office, kMonday - 1h, utc));  // Sunday
  // MET is one hour ahead of UTC.
  CHECK_FALSE(in_period(office, kMonday + 6h + 59min, kMet));
  CHECK(in_period(office, kMonday + 7h, kMet));
  CHECK_FALSE(in_period(office, kMonday + 17h, kMet));
  std::mt19937 rng(1);
  for (int i = 0; i < 200; ++i) {
    auto t = kMonday + Seconds(rng() % (86400 * 14));
    CHECK(in_period(p.at("24x7"), t, utc));
    CHECK_FALSE(in_period(p.at("never"), t, utc));
  }
}

TEST_CASE("rendered messages carry the sample notification fields") {
  auto config = web_config();
  const auto problem_fields = testing::notification_fields(testing::read_file(SENTINEL_FIXTURES "/sample_problem.txt"));
  const auto recovery_fields =
      testing::notification_fields(testing::read_file(SENTINEL_FIXTURES "/sample_recovery.txt"));

  StateEvent problem{EventKind::Problem, kSvc, from_epoch_seconds(1048059359), CheckStatus::Critical,
                     StateType::Hard, 1, "Connection refused by host"};
  auto text = render_message(make_message(problem, config, {"ops"}), "Nagios", "1.0", kMet);
  auto got = testing::notification_fields(text);
  for (const char* f : {"Notification Type", "Service", "Host", "Address", "State", "Additional Info"}) {
    CAPTURE(f);
    CHECK(got[f] == problem_fields.at(f));
  }
  // Same clock time and zone; the weekday is derived from the date.
  CHECK(got["Date/Time"].substr(3) == problem_fields.at("Date/Time").substr(3));
  CHECK(got["Date/Time"] == "Wed Mar 19 08:35:59 MET 2003");
  CHECK(got["header"] == problem_fields.at("header"));
  CHECK(text.rfind("***** Nagios 1.0 *****\n", 0) == 0);

  StateEvent recovery{EventKind::Recovery, kSvc, from_epoch_seconds(1048059466), CheckStatus::Ok, StateType::Hard,
                      1, "HTTP ok: HTTP/1.1 200 OK - 0 second response time"};
  auto rtext = render_message(make_message(recovery, config, {"ops"}), "Nagios", "1.0", kMet);
  auto rgot = testing::notification_fields(rtext);
  for (const auto& [k, v] : recovery_fields) {
    CAPTURE(k);
    CHECK(rgot[k] == v);
  }
  CHECK(rtext ==
        "***** Nagios 1.0 *****\n"
        "Notification Type: RECOVERY\n"
        "Service: IT Web Server\n"
        "Host: WWW Server WEB\n"
        "Address: 131.169.40.38\n"
        "State: OK\n"
        "Date/Time: Wed Mar 19 08:37:46 MET 2003\n"
        "Additional Info: HTTP ok: HTTP/1.1 200 OK - 0 second response time\n");

  StateEvent host_down{EventKind::Problem, ObjectKey::for_host("www"), from_epoch_seconds(1048059359),
                       HostStatus::Down, StateType::Hard, 1, "PING CRITICAL"};
  auto htext = render_message(make_message(host_down, config, {}), "Nagios", "1.0", kMet);
  CHECK(htext.find("Service:") == std::string::npos);
  CHECK(htext.find("State: DOWN\n") != std::string::npos);
  CHECK(std::count(htext.begin(), htext.end(), '\n') == 7);
}

TEST_CASE("render is injective on message fields") {
  std::mt19937 rng(99);
  auto word = [&] {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) s += static_cast<char>('a' + rng() % 3);
    return s;
  };
  std::map<std::string, std::tuple<std::string, std::optional<std::string>, std::string, std::string, std::string,
                                   long long, std::string>>
      seen;
  int collisions = 0;
  for (int i = 0; i < 5000; ++i) {
    NotificationMessage m;
    m.notification_type = rng() % 2 ? "PROBLEM" : "RECOVERY";
    if (rng() % 2) m.service_description = word();
    m.host_alias = word();
    m.address = word();
    m.state = word();
    m.at = kMonday + Seconds(rng() % 5);
    m.additional_info = word();
    auto key = std::make_tuple(m.notification_type, m.service_description, m.host_alias, m.address, m.state,
                               static_cast<long long>(to_epoch_seconds(m.at)), m.additional_info);
    auto text = render_message(m, "Sentinel", "1.0", TimeZone::utc());
    auto [it, fresh] = seen.emplace(text, key);
    if (!fresh && it->second != key) ++collisions;
  }
  CHECK(collisions == 0);
}

TEST_CASE("gate properties: one reason when false, monotone in options") {
  std::mt19937 rng(5);
  auto p = periods();
  const std::string letters = "wucr";
  const std::array<ObjectStatus, 4> statuses{CheckStatus::Ok, CheckStatus::Warning, CheckStatus::Critical,
                                             CheckStatus::Unknown};
  const std::array<EventKind, 4> kinds{EventKind::Problem, EventKind::Recovery, EventKind::RenotifyEligible,
                                       EventKind::StateLog};
  const std::array<const char*, 3> period_names{"24x7", "office", "never"};
  int violations = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string opts;
    for (char c : letters)
      if (rng() % 2) opts += opts.empty() ? std::string(1, c) : std::string(",") + c;
    auto pol = policy(opts.empty() ? "n" : opts, static_cast<int>(rng() % 4), period_names[rng() % 3]);
    auto st = hard_critical();
    if (rng() % 3 == 0) st.acknowledged = true;
    if (rng() % 3 == 0) st.downtimes.push_back({kMonday, kMonday + 12h, "", ""});
    if (rng() % 2) st.last_notification = kMonday - Seconds(rng() % 300);
    auto ev = event(kinds[rng() % 4], statuses[rng() % 4]);
    auto now = kMonday + Seconds(rng() % 86400);
    auto d = should_notify(ev, pol, st, p, now, 60s, TimeZone::utc());
    if (d.notify != d.reason.empty()) ++violations;
    for (char extra : letters) {
      auto wider = pol;
      wider.options = pol.options.with(extra, objconf::NotificationOptions::kServiceLetters);
      if (d.notify && !should_notify(ev, wider, st, p, now, 60s, TimeZone::utc()).notify) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("renotification timeline keeps gaps of at least one interval") {
  // Constant HARD CRITICAL, interval_length 1 s, notification_interval 22.
  auto p = periods();
  auto pol = policy("w,u,c,r", 22);
  auto st = hard_critical();
  const TimePoint t0 = kMonday;
  std::vector<TimePoint> sent;
  auto first = should_notify(event(EventKind::Problem, CheckStatus::Critical), pol, st, p, t0, 1s);
  REQUIRE(first.notify);
  sent.push_back(t0);
  st.last_notification = t0;
  for (int tick = 1; tick <= 200; ++tick) {
    auto now = t0 + Seconds(tick);
    auto ev = state::renotify_tick(st, kSvc, now);
    REQUIRE(ev);
    if (should_notify(*ev, pol, st, p, now, 1s).notify) {
      sent.push_back(now);
      st.last_notification = now;
    }
  }
  REQUIRE(sent.size() >= 8);
  for (std::size_t i = 1; i < sent.size(); ++i) {
    auto gap = sent[i] - sent[i - 1];
    CHECK(gap >= 22s);
    CHECK(gap <= 23s);
  }

  auto never = policy("w,u,c,r", 0);
  auto ev = state::renotify_tick(st, kSvc, t0 + 1000s);
  CHECK(should_notify(*ev, never, st, p, t0 + 1000s, 1s).reason == "renotification disabled");
}

TEST_CASE("channel commands get shell-quoted fields") {
  NotificationMessage m;
  m.notification_type = "PROBLEM";
  m.service_description = "IT Web Server";
  m.host_alias = "it's";
  m.address = "1.2.3.4";
  m.state = "CRITICAL";
  m.at = kMonday;
  m.additional_info = "$(touch /tmp/pwned); `id`";
  auto cmd = expand_channel_command("echo $NOTIFICATIONTYPE$ $HOSTALIAS$ $OUTPUT$ $SERVICESTATE$", m);
  ProcessSpec spec{{"/bin/sh", "-c", cmd}, "", 5000ms, 65536};
  auto out = run_process(spec);
  CHECK(out.stdout_data == "PROBLEM it's $(touch /tmp/pwned); `id` CRITICAL\n");
}

TEST_CASE("dispatch to file sinks and failing channels") {
  auto dir = std::filesystem::temp_directory_path() / ("sentinel-notify-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto outbox = dir / "outbox.txt";
  auto config = web_config();
  StateEvent problem{EventKind::Problem, kSvc, from_epoch_seconds(1048059359), CheckStatus::Critical,
                     StateType::Hard, 1, "Connection refused by host"};
  auto msg = make_message(problem, config, {"ops"});
  DispatchOptions opts;
  opts.zone = kMet;

  auto ok = dispatch(msg, "ops", "mail", "cat >> " + outbox.string(), opts);
  CHECK(ok.ok);
  CHECK(ok.attempts == 1);
  CHECK(testing::read_file(outbox.string()) == render_message(msg, opts.engine_name, opts.version, kMet));

  auto bad = dispatch(msg, "ops", "pager", "/nonexistent/sms-client", opts);
  CHECK_FALSE(bad.ok);
  CHECK(bad.attempts == 2);
  CHECK(format_dispatch_line(bad).find(" ops pager FAILED") != std::string::npos);

  LineLog log;
  AuditLog audit;
  {
    DispatchPool pool(opts, 2, &log, &audit);
    pool.submit({msg, "ops", "mail", "cat >> " + outbox.string()});
    pool.submit({msg, "web-admins", "mail", "cat >> " + outbox.string()});
    pool.submit({msg, "night", "pager", "/nonexistent/sms-client"});
    pool.drain();
    auto recs = pool.records();
    CHECK(recs.size() == 3);
    std::set<std::string> groups;
    for (auto& r : recs) groups.insert(r.group);
    CHECK(groups == std::set<std::string>{"ops", "web-admins", "night"});
  }
  CHECK(log.count() == 3);
  CHECK(audit.contains("dispatch to night via pager failed"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("contact groups fall back to the host and its hostgroups") {
  auto r = objconf::load_text(R"(
define command{
    command_name    c
    command_line    /bin/true
}
define contactgroup{
    contactgroup_name   a
}
define contactgroup{
    contactgroup_name   b
}
define contactgroup{
    contactgroup_name   s
}
define host{
    host_name       h
    address         1.1.1.1
    contact_groups  a
}
define hostgroup{
    hostgroup_name  g
    members         h
    contact_groups  b,a
}
define service{
    host_name           h
    service_description own
    check_command       c
    check_period        24x7
    max_check_attempts  1
    contact_groups      s
}
define service{
    host_name           h
    service_description inherited
    check_command       c
    check_period        24x7
    max_check_attempts  1
}
)");
  CHECK(effective_contact_groups(r.config, ObjectKey::for_service("h", "own")) == std::vector<std::string>{"s"});
  CHECK(effective_contact_groups(r.config, ObjectKey::for_service("h", "inherited")) ==
        std::vector<std::string>{"a", "b"});
  CHECK(effective_contact_groups(r.config, ObjectKey::for_host("h")) == std::vector<std::string>{"a", "b"});
}
