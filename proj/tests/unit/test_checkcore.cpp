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

#include <chrono>
#include <random>

#include "oracles.hpp"
#include "sentinel/checkcore.hpp"
#include "stub_server.hpp"

using namespace sentinel;
using namespace sentinel::checkcore;
using sentinel::testing::cluster_oracle;
using namespace std::chrono_literals;

namespace {

CheckResult run_sh(const std::string& script, Timeout timeout = kDefaultTimeout) {
  std::vector<std::string> argv{"/bin/sh", "-c", script};
  return execute_plugin(argv, timeout);
}

const std::string kFakePing = std::string(SENTINEL_FIXTURES) + "/bin/fake-ping";

int rank(CheckStatus s) {
  switch (s) {
    case CheckStatus::Ok: return 0;
    case CheckStatus::Warning: return 1;
    case CheckStatus::Critical: return 2;
    default: return -1;
  }
}

}  // namespace

TEST_CASE("plugin exit codes map onto check states") {
  auto crit = run_sh("echo 'Connection refused by host'; exit 2");
  CHECK(crit.status == CheckStatus::Critical);
  CHECK(crit.output == "Connection refused by host");
  CHECK(crit.origin == Origin::Active);
  CHECK(crit.finished_at >= crit.started_at);

  auto ok = run_sh("echo OK; exit 0");
  CHECK(ok.status == CheckStatus::Ok);
  CHECK(ok.output == "OK");

  CHECK(run_sh("echo w; exit 1").status == CheckStatus::Warning);
  CHECK(run_sh("echo u; exit 3").status == CheckStatus::Unknown);
}

TEST_CASE("every exit code outside 0..3 is UNKNOWN with a prefix") {
  for (int code = 0; code < 256; ++code) {
    auto r = run_sh("echo out; exit " + std::to_string(code));
    if (code <= 3) {
      CHECK(static_cast<int>(r.status) == code);
      CHECK(r.output == "out");
    } else {
      CHECK(r.status == CheckStatus::Unknown);
      CHECK(r.output == "(invalid exit code " + std::to_string(code) + ") out");
    }
  }
}

TEST_CASE("only the first output line is kept, capped at 4096 bytes") {
  auto r = run_sh("printf 'first\\nsecond\\nthird\\n'; exit 1");
  CHECK(r.output == "first");
  auto longer = run_sh("head -c 10000 /dev/zero | tr '\\0' x; exit 0");
  CHECK(longer.output.size() == kMaxOutputLine);
  CHECK(longer.output.find('\n') == std::string::npos);
  CHECK(run_sh("exit 0").output.empty());
}

TEST_CASE("plugins that hang are killed and reported CRITICAL") {
  auto t0 = std::chrono::steady_clock::now();
  auto r = run_sh("sleep 5; echo late; exit 0", 1s);
  auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(r.status == CheckStatus::Critical);
  CHECK(r.output == "check timed out after 1s");
  CHECK(elapsed >= 1s);
  CHECK(elapsed < 3s);
  auto wall = r.finished_at - r.started_at;
  CHECK(wall >= 900ms);
  CHECK(wall < 3s);

  // Background children holding stdout open are part of the killed group.
  auto t1 = std::chrono::steady_clock::now();
  auto bg = run_sh("(sleep 20 &) ; sleep 20", 500ms);
  CHECK(bg.status == CheckStatus::Critical);
  CHECK(bg.output == "check timed out after 0.5s");
  CHECK(std::chrono::steady_clock::now() - t1 < 3s);
}

TEST_CASE("missing or unusable plugins are UNKNOWN") {
  std::vector<std::string> missing{"/nonexistent/check_nothing", "-H", "x"};
  auto r = execute_plugin(missing, 1s);
  CHECK(r.status == CheckStatus::Unknown);
  CHECK(r.output.find("/nonexistent/check_nothing") != std::string::npos);

  std::vector<std::string> not_exec{std::string(SENTINEL_FIXTURES) + "/fileserver_template.cfg"};
  CHECK(execute_plugin(not_exec, 1s).status == CheckStatus::Unknown);
  CHECK(execute_plugin(std::vector<std::string>{}, 1s).status == CheckStatus::Unknown);

  auto sig = run_sh("kill -9 $$");
  CHECK(sig.status == CheckStatus::Unknown);
}

TEST_CASE("tcp probe") {
  testing::StubServer pop("+OK POP3 ready\r\n", false);
  auto plain = check_tcp("127.0.0.1", pop.port(), std::nullopt, 2s);
  CHECK(plain.status == CheckStatus::Ok);
  CHECK(plain.output == "TCP ok - 0 second response time on port " + std::to_string(pop.port()));

  auto banner = check_tcp("127.0.0.1", pop.port(), std::string("+OK"), 2s);
  CHECK(banner.status == CheckStatus::Ok);

  auto imap = check_tcp("127.0.0.1", pop.port(), std::string("* OK"), 2s);
  CHECK(imap.status == CheckStatus::Critical);
  CHECK(imap.output.find("+OK POP3 ready") != std::string::npos);

  auto refused = check_tcp("127.0.0.1", testing::closed_port(), std::nullopt, 2s);
  CHECK(refused.status == CheckStatus::Critical);
  CHECK(refused.output == "Connection refused by host");

  testing::StubServer silent("", false, 1500ms);
  auto quiet = check_tcp("127.0.0.1", silent.port(), std::string("+OK"), 500ms);
  CHECK(quiet.status == CheckStatus::Critical);
  CHECK(quiet.output == "check timed out after 0.5s");

  CHECK(check_tcp("127.0.0.1", 0, std::nullopt, 1s).status == CheckStatus::Unknown);
  CHECK(check_tcp("127.0.0.1", 70000, std::nullopt, 1s).status == CheckStatus::Unknown);
  CHECK(check_tcp("no-such-host.invalid", 80, std::nullopt, 2s).status == CheckStatus::Unknown);
}

TEST_CASE("http probe") {
  testing::StubServer ok("HTTP/1.1 200 OK\r\nContent-Length: 2\r\n\r\nhi", true);
  auto r = check_http("http://127.0.0.1:" + std::to_string(ok.port()) + "/index.html", 2s);
  CHECK(r.status == CheckStatus::Ok);
  CHECK(r.output == "HTTP ok: HTTP/1.1 200 OK - 0 second response time");
  auto req = ok.last_request();
  CHECK(req.rfind("GET /index.html HTTP/1.1\r\n", 0) == 0);
  CHECK(req.find("Connection: close") != std::string::npos);

  testing::StubServer err("HTTP/1.1 500 Internal Server Error\r\n\r\n", true);
  auto e = check_http("http://127.0.0.1:" + std::to_string(err.port()) + "/", 2s);
  CHECK(e.status == CheckStatus::Critical);
  CHECK(e.output.find("500") != std::string::npos);

  testing::StubServer moved("HTTP/1.1 301 Moved Permanently\r\nLocation: /x\r\n\r\n", true);
  CHECK(check_http("http://127.0.0.1:" + std::to_string(moved.port()), 2s).status == CheckStatus::Ok);

  testing::StubServer junk("SSH-2.0-OpenSSH\r\n", true);
  CHECK(check_http("http://127.0.0.1:" + std::to_string(junk.port()) + "/", 2s).status == CheckStatus::Critical);

  auto refused = check_http("http://127.0.0.1:" + std::to_string(testing::closed_port()) + "/", 2s);
  CHECK(refused.status == CheckStatus::Critical);
  CHECK(refused.output == "Connection refused by host");

  for (const char* bad : {"ftp://x/", "http://", "http://:80/", "http://host:99999/", "http://host:abc/"}) {
    CAPTURE(bad);
    CHECK(check_http(bad, 1s).status == CheckStatus::Unknown);
  }
}

TEST_CASE("url parsing") {
  auto u = HttpUrl::parse("http://www.example.org:8080/a/b?c=d");
  REQUIRE(u);
  CHECK(u->host == "www.example.org");
  CHECK(u->port == 8080);
  CHECK(u->path == "/a/b?c=d");
  auto v6 = HttpUrl::parse("http://[::1]/");
  REQUIRE(v6);
  CHECK(v6->host == "::1");
  CHECK(v6->port == 80);
  CHECK(HttpUrl::parse("HTTP://h")->path == "/");
}

TEST_CASE("ping probe delegates to the ping command") {
  PingOptions fake{kFakePing};
  auto up = check_ping("127.0.0.1", 2s, fake);
  CHECK(up.status == CheckStatus::Ok);
  CHECK(up.output.find("0.042 ms") != std::string::npos);

  auto t0 = std::chrono::steady_clock::now();
  auto down = check_ping("192.0.2.1", 1s, fake);
  CHECK(down.status == CheckStatus::Critical);
  CHECK(std::chrono::steady_clock::now() - t0 < 3s);

  CHECK(check_ping("10.255.255.1", 2s, fake).status == CheckStatus::Critical);

  auto missing = check_ping("127.0.0.1", 1s, PingOptions{"/opt/none/bin/ping"});
  CHECK(missing.status == CheckStatus::Unknown);
  CHECK(missing.output.find("/opt/none/bin/ping") != std::string::npos);
}

TEST_CASE("cluster examples") {
  using S = CheckStatus;
  std::vector<S> three_down{S::Critical, S::Critical, S::Critical, S::Ok, S::Ok};
  auto r = check_cluster(three_down, 1, 3);
  CHECK(r.status == S::Critical);
  CHECK(r.output == "cluster: 3/5 members failed");

  std::vector<S> all_ok(5, S::Ok);
  auto ok = check_cluster(all_ok, 1, 3);
  CHECK(ok.status == S::Ok);
  CHECK(ok.output == "cluster: 0/5 members failed");

  std::vector<S> one_warn{S::Warning, S::Ok, S::Ok, S::Ok, S::Ok};
  CHECK(check_cluster(one_warn, 1, 3).status == S::Warning);

  auto empty = check_cluster({}, 1, 1);
  CHECK(empty.status == S::Unknown);
  CHECK(empty.output == "cluster has no members");
}

TEST_CASE("cluster agrees with the counting oracle on every list up to length 8") {
  const std::array<CheckStatus, 4> all{CheckStatus::Ok, CheckStatus::Warning, CheckStatus::Critical,
                                       CheckStatus::Unknown};
  std::size_t mismatches = 0, monotone_violations = 0, cases = 0;
  for (int len = 1; len <= 8; ++len) {
    std::size_t combos = 1;
    for (int i = 0; i < len; ++i) combos *= 4;
    std::vector<std::pair<int, int>> thresholds;
    if (len <= 5) {
      for (int w = 1; w <= len; ++w)
        for (int c = w; c <= len; ++c) thresholds.emplace_back(w, c);
    } else {
      thresholds = {{1, len}, {2, len - 1}, {len / 2, len / 2 + 1}};
    }
    std::vector<CheckStatus> members(static_cast<std::size_t>(len));
    for (std::size_t code = 0; code < combos; ++code) {
      auto c = code;
      for (auto& m : members) {
        m = all[c % 4];
        c /= 4;
      }
      for (auto [w, cr] : thresholds) {
        ++cases;
        auto got = check_cluster(members, w, cr).status;
        if (got != cluster_oracle(members, w, cr)) ++mismatches;
        if (len > 6) continue;
        for (std::size_t i = 0; i < members.size(); ++i) {
          if (members[i] != CheckStatus::Ok) continue;
          for (auto bad : {CheckStatus::Warning, CheckStatus::Critical, CheckStatus::Unknown}) {
            auto worse = members;
            worse[i] = bad;
            if (rank(check_cluster(worse, w, cr).status) < rank(got)) ++monotone_violations;
          }
        }
      }
    }
  }
  CHECK(cases > 250000);
  CHECK(mismatches == 0);
  CHECK(monotone_violations == 0);
}

TEST_CASE("cluster rejects warn < 1 and warn > crit; crit above n just counts") {
  std::vector<CheckStatus> members(3, CheckStatus::Critical);
  CHECK(check_cluster(members, 0, 2).status == CheckStatus::Unknown);
  CHECK(check_cluster(members, 3, 2).status == CheckStatus::Unknown);
  CHECK(check_cluster(members, 1, 4).status == CheckStatus::Warning);
}

TEST_CASE("next check time") {
  TimePoint last = from_epoch_seconds(1047000000);
  objconf::ServiceDef svc;
  svc.normal_check_interval = 1;
  svc.retry_check_interval = 5;
  ScheduleEntry hard_ok{ObjectKey::for_service("h", "s"), {}, false};
  ScheduleEntry soft{ObjectKey::for_service("h", "s"), {}, true};
  CHECK(next_check_time(hard_ok, svc, last, 60s) == last + 60s);
  CHECK(next_check_time(soft, svc, last, 60s) == last + 300s);
  CHECK(next_check_time(hard_ok, svc, last, 1s) == last + 1s);

  objconf::HostDef host;
  host.normal_check_interval = 2;
  host.retry_check_interval = 1;
  CHECK(next_check_time(hard_ok, host, last, 60s) == last + 120s);
  CHECK(next_check_time(soft, host, last, 60s) == last + 60s);

  std::mt19937 rng(7);
  for (int i = 0; i < 1000; ++i) {
    int n = std::uniform_int_distribution<int>(0, 100)(rng);
    int r = std::uniform_int_distribution<int>(0, 100)(rng);
    bool retry = (rng() & 1) != 0;
    auto next = next_check_time(retry, n, r, last, Seconds(std::uniform_int_distribution<int>(1, 120)(rng)));
    CHECK(next >= last);
  }
}

TEST_CASE("built-in probe arguments") {
  testing::StubServer pop("+OK ready\r\n", false);
  std::vector<std::string> tcp{"tcp", "-H", "127.0.0.1", "-p", std::to_string(pop.port()), "-e", "+OK"};
  auto r = run_builtin_probe(tcp, 2s);
  REQUIRE(r);
  CHECK(r->status == CheckStatus::Ok);

  std::vector<std::string> cluster{"cluster", "-w", "1", "-c", "2", "OK", "CRITICAL", "2"};
  auto c = run_builtin_probe(cluster, 1s);
  REQUIRE(c);
  CHECK(c->status == CheckStatus::Critical);
  CHECK(c->output == "cluster: 2/3 members failed");

  std::vector<std::string> ping{"ping", "-H", "127.0.0.1"};
  auto p = run_builtin_probe(ping, 2s, PingOptions{kFakePing});
  REQUIRE(p);
  CHECK(p->status == CheckStatus::Ok);

  std::vector<std::string> bad{"tcp", "-H", "127.0.0.1"};
  auto b = run_builtin_probe(bad, 1s);
  REQUIRE(b);
  CHECK(b->status == CheckStatus::Unknown);

  std::vector<std::string> other{"check_load", "-w", "1"};
  CHECK_FALSE(run_builtin_probe(other, 1s));
}
