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

// Acceptance run: one PASS/FAIL line per criterion. Arguments select
// criteria by name; none runs them all. Exit status is the failure count.

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "engine_fixtures.hpp"
#include "notification_fields.hpp"
#include "oracles.hpp"
#include "sentinel/checkcore.hpp"
#include "sentinel/engine.hpp"
#include "sentinel/notify.hpp"
#include "sentinel/passive.hpp"
#include "sentinel/process.hpp"
#include "sentinel/statestore.hpp"

using namespace sentinel;
using namespace sentinel::testing;
using namespace std::chrono_literals;
using state::EventKind;
using state::StateType;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using SteadyClock = std::chrono::steady_clock;

double seconds_since(SteadyClock::time_point t0) {
  return std::chrono::duration<double>(SteadyClock::now() - t0).count();
}

std::string fmt(double v, int precision = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string fixture(const std::string& name) { return read_file(std::string(SENTINEL_FIXTURES) + "/" + name); }

// Golden files open with a '#' license block.
std::string golden(const std::string& name) {
  auto text = fixture("golden/" + name);
  std::size_t at = 0;
  while (at < text.size() && (text[at] == '#' || text[at] == '\n')) at = text.find('\n', at) + 1;
  return text.substr(at);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  os << text;
}

// Collects failed expectations; the first few end up in the detail text.
struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  Outcome outcome(const std::string& detail) const {
    if (failures.empty()) return {true, detail};
    std::string d = std::to_string(failures.size()) + " failed: ";
    for (std::size_t i = 0; i < failures.size() && i < 4; ++i) d += (i ? "; " : "") + failures[i];
    return {false, d};
  }
};

std::string dump_blocks(const std::vector<objconf::RawObjectBlock>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    out += b.kind + "\n";
    for (const auto& [k, v] : b.attributes) out += "  " + k + " = " + v + "\n";
  }
  return out;
}

std::size_t count_code(const std::vector<objconf::Diagnostic>& ds, const std::string& code) {
  return static_cast<std::size_t>(
      std::count_if(ds.begin(), ds.end(), [&](const objconf::Diagnostic& d) { return d.code == code; }));
}

const std::string kHostcheck = R"(
define host{
    name                hostcheck
    check_command       check-host-alive
    max_check_attempts  3
    register            0
}
)";

// ---------------------------------------------------------------------------

Outcome config_fidelity() {
  Checker c;
  auto t0 = SteadyClock::now();
  const auto tmpl_text = fixture("fileserver_template.cfg");
  const auto hosts_text = fixture("night_hosts.cfg");

  auto p4 = objconf::parse_objects(tmpl_text);
  auto p5 = objconf::parse_objects(hosts_text);
  c.expect(p4.diagnostics.empty() && p5.diagnostics.empty(), "parse diagnostics");
  c.expect(dump_blocks(p4.blocks) == golden("fileserver_template_blocks.txt"), "template blocks differ from golden");
  c.expect(dump_blocks(p5.blocks) == golden("night_hosts_blocks.txt"), "host blocks differ from golden");

  // The template file alone is a template only.
  auto r4 = objconf::resolve_templates(p4.blocks);
  c.expect(r4.config.services.empty(), "template produced a runtime service");
  auto& svc_templates = r4.templates["service"];
  c.expect(std::find(svc_templates.begin(), svc_templates.end(), "fileserver") != svc_templates.end(),
           "template fileserver missing");

  // An instance of the template carries its values.
  auto inst = objconf::load_text(tmpl_text + R"(
define command{
    command_name    check-fileserver
    command_line    /bin/true
}
define host{
    host_name   afs1
    address     131.169.40.109
}
define service{
    use                 fileserver
    host_name           afs1
    service_description fileserver
    check_command       check-fileserver
}
)");
  c.expect(inst.diagnostics.empty(), "template instance has diagnostics");
  if (auto* s = inst.config.find_service(ObjectKey::for_service("afs1", "fileserver"))) {
    c.expect(!s->is_volatile && !s->active_checks_enabled && s->passive_checks_enabled, "template check flags");
    c.expect(s->check_period == "24x7" && s->notification_period == "24x7", "template periods");
    c.expect(s->max_check_attempts == 10, "max_check_attempts != 10");
    c.expect(s->normal_check_interval == 1 && s->retry_check_interval == 5, "template intervals");
    c.expect(s->notification_interval == 2200, "notification_interval != 2200");
    c.expect(s->notification_options.str() == "w,u,c,r", "notification_options");
  } else {
    c.expect(false, "template instance missing");
  }

  // Host file with a hostcheck template: netra8 resolves, references are reported.
  auto p5t = objconf::parse_objects(hosts_text + kHostcheck);
  auto r5 = objconf::resolve_templates(p5t.blocks);
  if (auto* h = r5.config.find_host("netra8")) {
    c.expect(h->check_command.name == "check-host-alive", "netra8 check_command");
    c.expect(h->max_check_attempts == 3, "netra8 max_check_attempts");
    c.expect(h->address == "131.169.40.109" && h->alias == "netra AFS Server", "netra8 address/alias");
    c.expect(h->parents == std::vector<std::string>{"route-194", "route-40"}, "netra8 parents");
  } else {
    c.expect(false, "netra8 missing");
  }
  auto diags = objconf::validate(r5.config);
  c.expect(count_code(diags, "unknown-parent") == 2, "expected 2 unknown-parent diagnostics");
  c.expect(count_code(diags, "unknown-member") == 2, "expected 2 unknown-member diagnostics");

  // Canonical print is a fixpoint.
  TempDir dir;
  for (const auto& text : {night_config(dir / "outbox"), objconf::generate_from_assets(scale_assets())}) {
    auto a = objconf::load_text(text);
    auto printed = objconf::print_config(a.config);
    auto b = objconf::load_text(printed);
    c.expect(a.diagnostics.empty() && b.diagnostics.empty(), "round-trip diagnostics");
    c.expect(a.config == b.config && objconf::print_config(b.config) == printed, "print/reparse not a fixpoint");
  }
  double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + fmt(secs) + " s >= 1 s");
  return c.outcome("golden blocks match, netra8 resolved, fixpoint on 2 configs, " + fmt(secs, 3) + " s (< 1 s)");
}

// ---------------------------------------------------------------------------

Outcome scale_round_trip() {
  Checker c;
  TempDir dir;
  auto plugins = dir / "plugins";
  std::filesystem::create_directories(plugins);
  write_file(plugins / "stub-ok", "#!/bin/sh\necho \"OK - stub $*\"\nexit 0\n");
  ::chmod((plugins / "stub-ok").c_str(), 0755);

  auto policy = objconf::MonitoringPolicy::defaults();
  for (auto& [name, line] : policy.commands) line = "$PLUGINDIR$/stub-ok " + name + " $HOSTADDRESS$";
  auto config = load_config(objconf::generate_from_assets(scale_assets(), policy));
  c.expect(config.hosts.size() == 620, "hosts " + std::to_string(config.hosts.size()) + " != 620");
  c.expect(config.services.size() == 1270, "services " + std::to_string(config.services.size()) + " != 1270");
  const auto total = config.hosts.size() + config.services.size();

  engine::EngineOptions o;
  o.interval_length = 60s;
  o.stagger = false;
  o.plugin_dir = plugins.string();
  o.notifications = false;
  engine::Engine eng(config, o);
  auto t0 = SteadyClock::now();
  eng.start();
  std::size_t checked = 0, ok = 0;
  wait_until(
      [&] {
        checked = ok = 0;
        for (const auto& v : eng.snapshot().objects) {
          checked += v.state.checked;
          ok += v.state.checked && is_ok(v.state.current_status);
        }
        return checked == total;
      },
      120s);
  double secs = seconds_since(t0);
  auto stats = eng.scheduler_stats();
  eng.stop();
  c.expect(checked == total, std::to_string(checked) + "/" + std::to_string(total) + " objects checked");
  c.expect(ok == total, std::to_string(total - ok) + " objects not OK");
  c.expect(secs < 60.0, "round trip " + fmt(secs) + " s >= 60 s");
  return c.outcome("620 hosts + 1270 services, " + std::to_string(checked) + " plugin runs, round trip " +
                   fmt(secs) + " s (< 60 s), peak " + std::to_string(stats ? stats->peak_running : 0) +
                   " concurrent");
}

// ---------------------------------------------------------------------------

Outcome state_machine_oracle() {
  auto t0 = SteadyClock::now();
  std::mt19937 rng(19032003);
  const std::array<int, 3> maxes{1, 3, 10};
  const std::array<CheckStatus, 4> all{CheckStatus::Ok, CheckStatus::Warning, CheckStatus::Critical,
                                       CheckStatus::Unknown};
  const auto key = ObjectKey::for_service("www", "IT Web Server");
  std::size_t steps = 0, events = 0, mismatched_sequences = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    int max = maxes[rng() % 3];
    bool vol = rng() % 5 == 0;
    int len = std::uniform_int_distribution<int>(1, 50)(rng);
    double ok_bias = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    ReferenceAutomaton ref(max, vol);
    auto st = state::MonitorState::initial_service();
    state::TransitionRules rules{max, vol, true};
    bool same = true;
    for (int i = 0; i < len; ++i) {
      auto s = std::bernoulli_distribution(ok_bias)(rng) ? CheckStatus::Ok : all[1 + rng() % 3];
      CheckResult r;
      r.status = s;
      r.output = std::string(to_string(s));
      auto tr = state::apply_result(st, rules, key, r, from_epoch_seconds(1048059359 + 60 * i));
      std::vector<RefEvent> got;
      for (const auto& e : tr.events) {
        got.push_back({e.kind, std::get<CheckStatus>(e.status), e.state_type, e.attempt});
      }
      auto want = ref.step(s);
      same = same && got == want && tr.state.state_type == ref.type() && tr.state.attempt == ref.attempt();
      events += got.size();
      ++steps;
      st = tr.state;
    }
    mismatched_sequences += !same;
  }
  double secs = seconds_since(t0);
  Checker c;
  c.expect(mismatched_sequences == 0, std::to_string(mismatched_sequences) + " sequences differ");
  c.expect(secs < 30.0, "runtime " + fmt(secs) + " s >= 30 s");
  return c.outcome("10000 sequences, " + std::to_string(steps) + " results, " + std::to_string(events) +
                   " events identical to reference, " + fmt(secs) + " s (< 30 s)");
}

// ---------------------------------------------------------------------------

std::size_t count_events(LineLog& log, std::string_view kind) {
  std::size_t n = 0;
  for (const auto& line : log.tail()) n += line.find(" " + std::string(kind) + " ") != std::string::npos;
  return n;
}

passive::PassiveResultLine wire(const ObjectKey& key, int code, std::string output) {
  passive::PassiveResultLine l;
  l.received_at = to_epoch_seconds(Clock::now());
  l.host = key.host;
  l.kind = key.is_host() ? passive::ResultKind::Host : passive::ResultKind::Service;
  l.service = key.service;
  l.code = code;
  l.output = std::move(output);
  return l;
}

Outcome soft_hard() {
  Checker c;
  TempDir dir;
  const auto key = ObjectKey::for_service("netra8", "fileserver");
  engine::EngineOptions o;
  o.active_checks = false;
  o.zone = TimeZone::utc();
  o.dispatch.zone = TimeZone::utc();
  o.dispatch.engine_name = "Nagios";
  engine::Engine eng(load_config(night_config(dir / "outbox")), o);
  eng.start();
  int early_problems = 0;
  for (int i = 1; i <= 9; ++i) {
    eng.submit_passive(wire(key, 2, "CRITICAL - fileserver down"), "acceptance");
    early_problems += static_cast<int>(count_events(eng.event_log(), "PROBLEM"));
    auto st = *eng.state_of(key);
    c.expect(st.state_type == StateType::Soft && st.attempt == i, "attempt " + std::to_string(i) + " not SOFT");
  }
  c.expect(early_problems == 0, "PROBLEM before the 10th result");
  eng.submit_passive(wire(key, 2, "CRITICAL - fileserver down"), "acceptance");
  auto problems = count_events(eng.event_log(), "PROBLEM");
  c.expect(problems == 1, std::to_string(problems) + " PROBLEM events after 10 results");
  c.expect(eng.state_of(key)->hard_problem(), "not HARD after 10 results");
  eng.submit_passive(wire(key, 0, "OK - fileserver back"), "acceptance");
  auto recoveries = count_events(eng.event_log(), "RECOVERY");
  c.expect(recoveries == 1, std::to_string(recoveries) + " RECOVERY events");
  c.expect(count_events(eng.event_log(), "PROBLEM") == 1, "extra PROBLEM");
  eng.dispatcher()->drain();
  eng.stop();

  // Dispatch workers run in parallel, so messages may land in either order.
  auto outbox = read_file((dir / "outbox").string());
  std::map<std::string, int> by_type;
  for (std::size_t at = outbox.find("*****"); at != std::string::npos;) {
    auto next = outbox.find("\n*****", at + 1);
    auto block = outbox.substr(at, next == std::string::npos ? std::string::npos : next + 1 - at);
    ++by_type[notification_fields(block)["Notification Type"]];
    at = next == std::string::npos ? next : next + 1;
  }
  const auto problem_type = notification_fields(fixture("sample_problem.txt")).at("Notification Type");
  const auto recovery_type = notification_fields(fixture("sample_recovery.txt")).at("Notification Type");
  c.expect(by_type[problem_type] == 1, std::to_string(by_type[problem_type]) + " " + problem_type + " messages");
  c.expect(by_type[recovery_type] == 1, std::to_string(by_type[recovery_type]) + " " + recovery_type + " messages");
  c.expect(by_type.size() == 2, std::to_string(by_type.size()) + " distinct message types in outbox");
  return c.outcome("9 SOFT, PROBLEM at attempt 10 only; outbox holds 1 " + problem_type + " and 1 '" +
                   recovery_type + "' message");
}

// ---------------------------------------------------------------------------

Outcome notification_format() {
  Checker c;
  const auto met = TimeZone::fixed("MET", Seconds(3600));
  auto config = load_config(R"(
define command{
    command_name    check_http
    command_line    /bin/true
}
define host{
    host_name       www
    alias           WWW Server WEB
    address         131.169.40.38
}
define service{
    host_name           www
    service_description IT Web Server
    check_command       check_http
    check_period        24x7
    max_check_attempts  3
}
)");
  const auto key = ObjectKey::for_service("www", "IT Web Server");
  const auto problem_sample = notification_fields(fixture("sample_problem.txt"));
  const auto recovery_sample = notification_fields(fixture("sample_recovery.txt"));

  state::StateEvent problem{EventKind::Problem, key, from_epoch_seconds(1048059359), CheckStatus::Critical,
                            StateType::Hard, 1, "Connection refused by host"};
  state::StateEvent recovery{EventKind::Recovery, key, from_epoch_seconds(1048059466), CheckStatus::Ok,
                             StateType::Hard, 1, "HTTP ok: HTTP/1.1 200 OK - 0 second response time"};
  auto ptext = notify::render_message(notify::make_message(problem, config, {"ops"}), "Nagios", "1.0", met);
  auto rtext = notify::render_message(notify::make_message(recovery, config, {"ops"}), "Nagios", "1.0", met);
  auto pgot = notification_fields(ptext);
  auto rgot = notification_fields(rtext);

  int exact = 0, total = 0;
  for (const auto& [sample, got, name] :
       {std::tuple{&problem_sample, &pgot, "PROBLEM"}, std::tuple{&recovery_sample, &rgot, "RECOVERY"}}) {
    for (const auto& [field, value] : *sample) {
      ++total;
      if (field == "Date/Time" && sample == &problem_sample) {
        // The sample's weekday disagrees with the calendar; the rest must match.
        bool ok = (*got)[field].substr(3) == value.substr(3) && (*got)[field].substr(0, 3) == "Wed";
        c.expect(ok, std::string(name) + " Date/Time '" + (*got)[field] + "'");
        exact += ok;
        continue;
      }
      bool ok = (*got)[field] == value;
      c.expect(ok, std::string(name) + " " + field + ": '" + (*got)[field] + "' != '" + value + "'");
      exact += ok;
    }
  }
  c.expect(ptext.rfind("***** Nagios 1.0 *****\n", 0) == 0, "PROBLEM engine/version line");
  c.expect(rtext.rfind("***** Nagios 1.0 *****\n", 0) == 0, "RECOVERY engine/version line");
  return c.outcome(std::to_string(exact) + "/" + std::to_string(total) +
                   " fields match (sample PROBLEM weekday taken from the calendar: Wed Mar 19 2003)");
}

// ---------------------------------------------------------------------------

Outcome renotification() {
  Checker c;
  // Fileserver template with its interval scaled from 2200 to 22 units of 1 s.
  auto config = load_config(fixture("fileserver_template.cfg") + R"(
define command{
    command_name    check-fileserver
    command_line    /bin/true
}
define host{
    host_name   afs1
    address     131.169.40.109
}
define service{
    use                     fileserver
    host_name               afs1
    service_description     fileserver
    check_command           check-fileserver
    notification_interval   22
}
)");
  const auto key = ObjectKey::for_service("afs1", "fileserver");
  const auto& def = *config.find_service(key);
  auto policy = notify::NotificationPolicy::from(def);
  notify::PeriodTable periods{{"24x7", objconf::TimePeriodDef::always()}};
  const Seconds tick(1);
  const TimePoint t0 = from_epoch_seconds(1048059359);

  auto st = state::MonitorState::initial_service();
  auto rules = state::TransitionRules::from(def);
  rules.passive_checks_enabled = true;
  std::optional<TimePoint> first_problem;
  std::vector<TimePoint> sent;
  TimePoint now = t0;
  for (int i = 0; i < 10; ++i, now += tick) {
    CheckResult r;
    r.status = CheckStatus::Critical;
    r.origin = Origin::Passive;
    auto tr = state::apply_result(st, rules, key, r, now);
    st = tr.state;
    for (const auto& e : tr.events) {
      if (e.kind != EventKind::Problem) continue;
      first_problem = now;
      if (notify::should_notify(e, policy, st, periods, now, tick, TimeZone::utc()).notify) {
        sent.push_back(now);
        st.last_notification = now;
      }
    }
  }
  c.expect(first_problem.has_value(), "no PROBLEM");
  c.expect(!sent.empty() && first_problem && sent.front() == *first_problem, "first notification not immediate");
  const TimePoint end = now + Seconds(300);
  for (; now <= end; now += tick) {
    if (auto ev = state::renotify_tick(st, key, now)) {
      if (notify::should_notify(*ev, policy, st, periods, now, tick, TimeZone::utc()).notify) {
        sent.push_back(now);
        st.last_notification = now;
      }
    }
  }
  Seconds min_gap(1000000), max_gap(0);
  for (std::size_t i = 1; i < sent.size(); ++i) {
    auto gap = std::chrono::duration_cast<Seconds>(sent[i] - sent[i - 1]);
    min_gap = std::min(min_gap, gap);
    max_gap = std::max(max_gap, gap);
  }
  c.expect(sent.size() >= 10, std::to_string(sent.size()) + " notifications in 300 s");
  c.expect(min_gap >= Seconds(22), "gap " + std::to_string(min_gap.count()) + " s < 22 s");
  c.expect(max_gap <= Seconds(23), "gap " + std::to_string(max_gap.count()) + " s > 22 s + 1 tick");
  return c.outcome(std::to_string(sent.size()) + " notifications, first at the PROBLEM, gaps " +
                   std::to_string(min_gap.count()) + ".." + std::to_string(max_gap.count()) + " s (22 s +/- 1 tick)");
}

// ---------------------------------------------------------------------------

Outcome cluster_exhaustive() {
  const std::array<CheckStatus, 4> all{CheckStatus::Ok, CheckStatus::Warning, CheckStatus::Critical,
                                       CheckStatus::Unknown};
  std::size_t cases = 0, mismatches = 0;
  for (int len = 1; len <= 8; ++len) {
    std::size_t combos = 1;
    for (int i = 0; i < len; ++i) combos *= 4;
    std::vector<CheckStatus> members(static_cast<std::size_t>(len));
    for (std::size_t code = 0; code < combos; ++code) {
      auto v = code;
      for (auto& m : members) {
        m = all[v % 4];
        v /= 4;
      }
      ++cases;
      mismatches += checkcore::check_cluster(members, 1, 3).status != cluster_oracle(members, 1, 3);
    }
  }
  Checker c;
  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");
  return c.outcome(std::to_string(cases) + " member vectors (length 1..8, 4 statuses, warn=1 crit=3), 0 mismatches");
}

// ---------------------------------------------------------------------------

Outcome reachability() {
  Checker c;
  std::mt19937 rng(1948);
  std::size_t hosts = 0, mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 10)(rng);
    std::vector<std::vector<int>> parents(static_cast<std::size_t>(n));
    for (int h = 1; h < n; ++h) {
      for (int p = 0; p < h; ++p) {
        if (rng() % 3 == 0) parents[static_cast<std::size_t>(h)].push_back(p);
      }
    }
    // Shuffle names so topological order is not the name order.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<bool> passed(static_cast<std::size_t>(n));
    for (auto&& b : passed) b = rng() % 2 == 0;
    std::map<std::string, bool> in;
    std::map<std::string, std::vector<std::string>> par;
    auto name = [&](int h) { return "h" + std::to_string(perm[static_cast<std::size_t>(h)]); };
    for (int h = 0; h < n; ++h) {
      in[name(h)] = passed[static_cast<std::size_t>(h)];
      for (int p : parents[static_cast<std::size_t>(h)]) par[name(h)].push_back(name(p));
    }
    auto got = state::host_reachability(in, par);
    auto want = reach_oracle(passed, parents);
    for (int h = 0; h < n; ++h, ++hosts) mismatches += got[name(h)] != want[static_cast<std::size_t>(h)];
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " hosts differ from the fixpoint");

  // The night topology, parents taken from the parsed configuration.
  TempDir dir;
  auto config = load_config(night_config(dir / "outbox"));
  std::map<std::string, bool> passed;
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& [h, def] : config.hosts) {
    passed[h] = true;
    parents[h] = def.parents;
  }
  passed["netra8"] = passed["route-194"] = passed["route-40"] = false;
  auto r = state::host_reachability(passed, parents);
  c.expect(r["route-194"] == HostStatus::Down && r["route-40"] == HostStatus::Down, "routers not DOWN");
  c.expect(r["netra8"] == HostStatus::Unreachable, "netra8 is " + std::string(to_string(r["netra8"])));
  return c.outcome("500 DAGs / " + std::to_string(hosts) + " hosts match the fixpoint; netra8 behind DOWN " +
                   "route-194, route-40 is " + std::string(to_string(r["netra8"])));
}

// ---------------------------------------------------------------------------

Outcome distributed() {
  Checker c;
  TempDir dir;
  auto open_listener = net::listen_tcp(net::Endpoint{"127.0.0.1", 0});
  const int open_port = net::local_port(open_listener);
  std::atomic<bool> serving{true};
  std::thread acceptor([&] {
    while (serving) {
      pollfd p{open_listener.fd(), POLLIN, 0};
      if (::poll(&p, 1, 100) > 0) {
        int fd = ::accept(open_listener.fd(), nullptr, nullptr);
        if (fd >= 0) ::close(fd);
      }
    }
  });
  int closed_port = 0;
  {
    auto tmp = net::listen_tcp(net::Endpoint{"127.0.0.1", 0});
    closed_port = net::local_port(tmp);
  }
  std::string cfg = R"(
define command{
    command_name    check-open
    command_line    sentinel-check tcp -H $HOSTADDRESS$ -p )" + std::to_string(open_port) + R"(
}
define command{
    command_name    check-closed
    command_line    sentinel-check tcp -H $HOSTADDRESS$ -p )" + std::to_string(closed_port) + R"(
}
)";
  for (int h = 0; h < 10; ++h) {
    auto host = "node" + std::to_string(h);
    cfg += "define host{\n host_name " + host + "\n address 127.0.0.1\n check_command check-open\n" +
           " max_check_attempts 1\n normal_check_interval 1\n}\n";
    for (int s = 0; s < 5; ++s) {
      cfg += "define service{\n host_name " + host + "\n service_description svc" + std::to_string(s) +
             "\n check_command " + (s % 2 ? "check-closed" : "check-open") +
             "\n check_period 24x7\n max_check_attempts 1\n normal_check_interval 1\n retry_check_interval 1\n}\n";
    }
  }
  write_file(dir / "objects.cfg", cfg);
  auto config = load_config(cfg);

  engine::EngineOptions o;
  o.active_checks = false;
  o.interval_length = 1s;
  o.notifications = false;
  engine::Engine eng(config, o);
  eng.start();
  passive::GatewayOptions go;
  go.listen = {"127.0.0.1", 0};
  passive::Gateway gw(go, eng.sink(), &eng.audit());
  gw.start();

  const int per_worker = 500;
  std::array<ProcessOutcome, 2> runs;
  std::vector<std::thread> threads;
  auto t0 = SteadyClock::now();
  for (int w = 0; w < 2; ++w) {
    threads.emplace_back([&, w] {
      ProcessSpec spec;
      spec.argv = {std::string(SENTINEL_TOOLS) + "/sentinel-worker",
                   "--gateway",
                   "127.0.0.1:" + std::to_string(gw.port()),
                   "--worker-index",
                   std::to_string(w),
                   "--worker-count",
                   "2",
                   "--interval-length",
                   "1",
                   "--limit",
                   std::to_string(per_worker),
                   "--journal",
                   (dir / ("journal" + std::to_string(w))).string(),
                   (dir / "objects.cfg").string()};
      spec.timeout = 120s;
      runs[static_cast<std::size_t>(w)] = run_process(spec);
    });
  }
  for (auto& t : threads) t.join();
  double worker_secs = seconds_since(t0);
  for (int w = 0; w < 2; ++w) {
    const auto& r = runs[static_cast<std::size_t>(w)];
    c.expect(r.kind == ProcessOutcome::Kind::Exited && r.exit_code == 0, "worker " + std::to_string(w) + " failed");
  }

  // Last status each worker observed, and the total it submitted.
  std::map<ObjectKey, ObjectStatus> observed;
  std::size_t journal_lines = 0;
  std::set<ObjectKey> per_worker_keys[2];
  for (int w = 0; w < 2; ++w) {
    std::ifstream in(dir / ("journal" + std::to_string(w)));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto rec = passive::decode_line(line);
      ++journal_lines;
      per_worker_keys[w].insert(rec.key());
      if (rec.kind == passive::ResultKind::Host) {
        observed[rec.key()] = rec.code == 0 ? ObjectStatus(HostStatus::Up) : ObjectStatus(HostStatus::Down);
      } else {
        observed[rec.key()] = ObjectStatus(*check_status_from_code(rec.code));
      }
    }
  }
  std::vector<ObjectKey> overlap;
  std::set_intersection(per_worker_keys[0].begin(), per_worker_keys[0].end(), per_worker_keys[1].begin(),
                        per_worker_keys[1].end(), std::back_inserter(overlap));
  c.expect(overlap.empty(), "workers share objects");

  auto t_conv = SteadyClock::now();
  std::size_t converged = 0;
  bool all_converged = wait_until(
      [&] {
        converged = 0;
        for (const auto& [key, want] : observed) converged += eng.state_of(key)->current_status == want;
        return converged == observed.size();
      },
      10s);
  double conv_secs = seconds_since(t_conv);
  eng.flush();
  auto counters = eng.counters();
  auto gstats = gw.stats();
  gw.stop();
  eng.stop();
  serving = false;
  acceptor.join();

  const std::size_t expected = 2 * per_worker;
  c.expect(journal_lines == expected, "workers journaled " + std::to_string(journal_lines));
  c.expect(gstats.accepted == expected, "gateway accepted " + std::to_string(gstats.accepted));
  c.expect(counters.passive_results == expected, "engine applied " + std::to_string(counters.passive_results));
  c.expect(counters.rejected_results == 0, std::to_string(counters.rejected_results) + " rejected");
  c.expect(observed.size() == 60, std::to_string(observed.size()) + "/60 objects observed");
  c.expect(all_converged, std::to_string(converged) + "/" + std::to_string(observed.size()) + " converged");
  return c.outcome("2 workers submitted " + std::to_string(journal_lines) + ", gateway accepted " +
                   std::to_string(gstats.accepted) + ", engine applied " +
                   std::to_string(counters.passive_results) + " (0 lost); " + std::to_string(converged) + "/" +
                   std::to_string(observed.size()) + " objects converged in " + fmt(conv_secs, 3) +
                   " s (< 10 s); workers ran " + fmt(worker_secs, 1) + " s");
}

// ---------------------------------------------------------------------------

store::StatusSnapshot big_snapshot(int generation) {
  store::StatusSnapshot s;
  s.generated_at = from_epoch_seconds(1048059359 + generation);
  for (int i = 0; i < 2000; ++i) {
    auto st = state::MonitorState::initial_service();
    st.current_status = (i + generation) % 7 == 0 ? CheckStatus::Critical : CheckStatus::Ok;
    st.last_output = "generation " + std::to_string(generation) + " object " + std::to_string(i);
    st.checked = true;
    s.entries[ObjectKey::for_service("host" + std::to_string(i / 4), "svc" + std::to_string(i % 4))] = st;
  }
  return s;
}

Outcome crash_safety() {
  Checker c;
  TempDir dir;
  const auto file = dir / std::string(store::kStatusFile);
  {
    store::StatusWriter w(dir.path());
    w.write(big_snapshot(0));
  }
  int staged = 0, killed = 0, unparseable = 0, wrong_generation = 0;
  int generation = 0, committed = 0;

  // Crash at each step of the write sequence: before the rename the old
  // snapshot must survive, after it the new one must be complete.
  const std::array<store::WriteStage, 5> stages{store::WriteStage::TempOpened, store::WriteStage::HalfWritten,
                                                store::WriteStage::Written, store::WriteStage::BeforeRename,
                                                store::WriteStage::Renamed};
  for (int round = 0; round < 4; ++round) {
    for (auto stage : stages) {
      ++generation;
      pid_t pid = ::fork();
      if (pid == 0) {
        store::StatusWriter w(dir.path());
        w.write(big_snapshot(generation), [stage](store::WriteStage s) {
          if (s == stage) ::_exit(9);
        });
        ::_exit(0);
      }
      ::waitpid(pid, nullptr, 0);
      ++staged;
      if (stage == store::WriteStage::Renamed) committed = generation;
      try {
        auto snap = store::read_status(file);
        if (snap != big_snapshot(committed)) ++wrong_generation;
      } catch (const std::exception&) {
        ++unparseable;
      }
    }
  }

  // SIGKILL a writer that rewrites the file in a loop, at random moments.
  std::mt19937 rng(7);
  for (int round = 0; round < 40; ++round) {
    pid_t pid = ::fork();
    if (pid == 0) {
      store::StatusWriter w(dir.path());
      for (int g = 1000 + round * 1000;; ++g) w.write(big_snapshot(g));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5 + rng() % 60));
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    ++killed;
    try {
      auto snap = store::read_status(file);
      auto gen = static_cast<int>(to_epoch_seconds(snap.generated_at) - 1048059359);
      if (snap != big_snapshot(gen)) ++wrong_generation;
    } catch (const std::exception&) {
      ++unparseable;
    }
  }
  c.expect(unparseable == 0, std::to_string(unparseable) + " unparseable status files");
  c.expect(wrong_generation == 0, std::to_string(wrong_generation) + " files not equal to a whole snapshot");
  // Leave a half-written temporary behind, then restart the writer.
  if (pid_t pid = ::fork(); pid == 0) {
    store::StatusWriter w(dir.path());
    w.write(big_snapshot(99999), [](store::WriteStage s) {
      if (s == store::WriteStage::HalfWritten) ::_exit(9);
    });
    ::_exit(0);
  } else {
    ::waitpid(pid, nullptr, 0);
  }
  std::size_t left_over = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) left_over += e.path().filename() != "status.dat";
  {
    store::StatusWriter w(dir.path());
    std::size_t temps = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir.path())) temps += e.path().filename() != "status.dat";
    c.expect(left_over > 0, "no temporary left by the crashed writer");
    c.expect(temps == 0, std::to_string(temps) + " temporaries left after restart");
  }

  // Restart with retention: hard states resume without a new PROBLEM.
  TempDir rdir;
  engine::EngineOptions o;
  o.active_checks = false;
  o.retention_file = rdir / "retention.dat";
  auto config = load_config(night_config(rdir / "outbox"));
  const auto netra = ObjectKey::for_host("netra8");
  const auto http = ObjectKey::for_service("www", "http");
  auto fail = [](CheckStatus s) {
    CheckResult r;
    r.status = s;
    r.output = "still failing";
    return r;
  };
  {
    engine::Engine e(config, o);
    e.start();
    for (int i = 0; i < 3; ++i) e.submit(netra, fail(CheckStatus::Critical));
    e.submit(http, fail(CheckStatus::Critical));
    e.flush();
    e.acknowledge(netra, "ops", "known outage");
    e.stop();
  }
  engine::Engine e(config, o);
  e.start();
  auto n = *e.state_of(netra);
  auto h = *e.state_of(http);
  c.expect(n.hard_problem() && n.current_status == ObjectStatus(HostStatus::Down) && n.acknowledged,
           "netra8 not restored HARD DOWN acknowledged");
  c.expect(h.hard_problem() && h.current_status == ObjectStatus(CheckStatus::Critical), "www/http not restored");
  e.submit(netra, fail(CheckStatus::Critical));
  e.submit(http, fail(CheckStatus::Critical));
  e.flush();
  auto spurious = count_events(e.event_log(), "PROBLEM");
  e.stop();
  c.expect(spurious == 0, std::to_string(spurious) + " PROBLEM events after restart");
  return c.outcome(std::to_string(staged) + " staged crashes + " + std::to_string(killed) +
                   " SIGKILLs: every status.dat parsed as a whole snapshot, " + std::to_string(left_over) +
                   " stale temporaries removed on restart; retention resumed 2 hard problems, " +
                   std::to_string(spurious) + " new PROBLEM events");
}

// ---------------------------------------------------------------------------

Outcome load_substitute() {
  // Liveness: over a window W every due check is dispatched at least W/interval - 1 times.
  std::string cfg = "define command{\n command_name t\n command_line /bin/true\n}\n"
                    "define host{\n host_name h\n address 127.0.0.1\n}\n";
  for (int i = 0; i < 50; ++i) {
    cfg += "define service{\n host_name h\n service_description s" + std::to_string(i) +
           "\n check_command t\n check_period 24x7\n max_check_attempts 1\n normal_check_interval 1\n}\n";
  }
  auto config = load_config(cfg);
  auto exec = std::make_shared<ScriptedExecutor>();
  checkcore::SchedulerOptions so;
  so.interval_length = 1s;
  checkcore::Scheduler sched(config, exec, [](const ObjectKey&, const CheckResult&) {}, so);
  const int window = 6;
  sched.start();
  std::this_thread::sleep_for(std::chrono::seconds(window));
  sched.stop();
  int min_runs = 1 << 30;
  for (int i = 0; i < 50; ++i) min_runs = std::min(min_runs, exec->runs(ObjectKey::for_service("h", "s" + std::to_string(i))));
  Checker c;
  c.expect(min_runs >= window - 1, "a check ran only " + std::to_string(min_runs) + " times in " +
                                       std::to_string(window) + " s");
  return c.outcome("per-box load 0.2-3 not reproducible on current hardware; substituted: 50 checks at 1 s each ran >= " +
                   std::to_string(min_runs) + " times in " + std::to_string(window) +
                   " s (bound W/interval-1 = " + std::to_string(window - 1) + ") plus the scale round trip");
}

}  // namespace

int main(int argc, char** argv) {
  ignore_sigpipe();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"config-fidelity", config_fidelity},
      {"scale-round-trip", scale_round_trip},
      {"state-machine-oracle", state_machine_oracle},
      {"soft-hard-max-attempts-10", soft_hard},
      {"notification-format", notification_format},
      {"renotification-interval", renotification},
      {"cluster-oracle", cluster_exhaustive},
      {"reachability", reachability},
      {"distributed-integration", distributed},
      {"crash-safety", crash_safety},
      {"load-figures-substituted", load_substitute},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    auto t0 = SteadyClock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(27) << name << " "
              << std::right << std::setw(7) << fmt(seconds_since(t0)) << " s  " << out.detail << std::endl;
  }
  return failures;
}
