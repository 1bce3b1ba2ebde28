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

#include <algorithm>
#include <set>
#include <sstream>

#include "sentinel/objconf.hpp"
#include "sentinel/strutil.hpp"

namespace sentinel::objconf {

namespace {

constexpr std::pair<HostClass, std::string_view> kClassNames[] = {
    {HostClass::NetworkDevice, "NetworkDevice"}, {HostClass::FarmPC, "FarmPC"},
    {HostClass::Printer, "Printer"},             {HostClass::WorkgroupServer, "WorkgroupServer"},
    {HostClass::Mail, "Mail"},                   {HostClass::WebServer, "WebServer"},
    {HostClass::AFSServer, "AFSServer"},
};

}  // namespace

std::string_view to_string(HostClass c) {
  for (const auto& [k, name] : kClassNames) {
    if (k == c) return name;
  }
  return "FarmPC";
}

std::optional<HostClass> parse_host_class(std::string_view s) {
  // "WEB Server", "web-server" and "WebServer" all name the same class.
  std::string squeezed;
  for (char c : s) {
    if (c != ' ' && c != '-' && c != '_' && c != '\t') squeezed += c;
  }
  for (const auto& [k, name] : kClassNames) {
    if (iequals(name, squeezed)) return k;
  }
  return std::nullopt;
}

MonitoringPolicy MonitoringPolicy::defaults() {
  MonitoringPolicy p;
  p.host_check_command = "check-host-alive";
  p.services = {
      {HostClass::NetworkDevice, {}},
      {HostClass::FarmPC, {}},
      {HostClass::Printer, {{"PRINTER", "check_printer"}}},
      {HostClass::WorkgroupServer, {{"LOAD", "check_load"}, {"DISK", "check_disk"}, {"PROCS", "check_procs"}}},
      {HostClass::Mail, {{"POP", "check_pop"}, {"IMAP", "check_imap"}}},
      {HostClass::WebServer, {{"HTTP", "check_http"}}},
      {HostClass::AFSServer, {{"AFS", "check_afs"}}},
  };
  p.commands = {
      {"check-host-alive", "$PLUGINDIR$/sentinel-check ping -H $HOSTADDRESS$"},
      {"check_printer", "$PLUGINDIR$/check_printer -H $HOSTADDRESS$"},
      {"check_load", "$PLUGINDIR$/check_load -H $HOSTADDRESS$"},
      {"check_disk", "$PLUGINDIR$/check_disk -H $HOSTADDRESS$"},
      {"check_procs", "$PLUGINDIR$/check_procs -H $HOSTADDRESS$"},
      {"check_pop", "$PLUGINDIR$/sentinel-check tcp -H $HOSTADDRESS$ -p 110 -e +OK"},
      {"check_imap", "$PLUGINDIR$/sentinel-check tcp -H $HOSTADDRESS$ -p 143 -e '* OK'"},
      {"check_http", "$PLUGINDIR$/sentinel-check http -u http://$HOSTADDRESS$/"},
      {"check_afs", "$PLUGINDIR$/check_afs -H $HOSTADDRESS$"},
  };
  return p;
}

std::vector<AssetRecord> parse_assets_csv(std::string_view text) {
  std::vector<AssetRecord> out;
  bool header_seen = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line, ',');
    std::vector<std::string> cells;
    for (auto f : fields) {
      auto t = trim(f);
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
      cells.emplace_back(t);
    }
    if (!header_seen) {
      if (cells != std::vector<std::string>{"hostname", "address", "host_class", "contact_group"}) {
        throw AssetError("line " + std::to_string(line_no) +
                         ": expected header 'hostname,address,host_class,contact_group'");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 4) {
      throw AssetError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(cells.size()));
    }
    auto cls = parse_host_class(cells[2]);
    if (!cls) throw AssetError("line " + std::to_string(line_no) + ": unknown host_class '" + cells[2] + "'");
    if (cells[0].empty() || cells[1].empty() || cells[3].empty())
      throw AssetError("line " + std::to_string(line_no) + ": empty field");
    out.push_back({cells[0], cells[1], *cls, cells[3]});
  }
  return out;
}

namespace {

void put(std::ostringstream& os, std::string_view key, std::string_view value) {
  os << "    " << key;
  for (std::size_t i = key.size(); i < 24; ++i) os << ' ';
  os << ' ' << value << '\n';
}

}  // namespace

std::string generate_from_assets(std::span<const AssetRecord> assets, const MonitoringPolicy& policy) {
  std::vector<AssetRecord> sorted(assets.begin(), assets.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AssetRecord& a, const AssetRecord& b) { return a.hostname < b.hostname; });

  std::set<std::string> duplicates;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].hostname == sorted[i - 1].hostname) duplicates.insert(sorted[i].hostname);
  }
  if (!duplicates.empty()) {
    throw AssetError("duplicate hostname(s): " + join({duplicates.begin(), duplicates.end()}, ", "));
  }

  std::ostringstream os;
  os << "# Generated from the asset inventory by sentinel-conf; do not edit by hand.\n";
  os << "# " << sorted.size() << " hosts\n\n";
  if (sorted.empty()) return os.str();

  std::set<std::string> used_commands{policy.host_check_command};
  std::set<std::string> groups;
  for (const auto& a : sorted) {
    groups.insert(a.owner_contact_group);
    auto it = policy.services.find(a.host_class);
    if (it == policy.services.end()) continue;
    for (const auto& s : it->second) used_commands.insert(CommandRef::parse(s.command).name);
  }

  for (const auto& name : used_commands) {
    auto it = policy.commands.find(name);
    if (it == policy.commands.end()) throw AssetError("policy references undefined command '" + name + "'");
    os << "define command{\n";
    put(os, "command_name", name);
    put(os, "command_line", it->second);
    os << "}\n\n";
  }
  for (const auto& g : groups) {
    os << "define contactgroup{\n";
    put(os, "contactgroup_name", g);
    put(os, "alias", g);
    os << "}\n\n";
  }

  os << "define host{\n";
  put(os, "name", "generic-host");
  put(os, "check_command", policy.host_check_command);
  put(os, "check_period", "24x7");
  put(os, "max_check_attempts", "3");
  put(os, "normal_check_interval", "1");
  put(os, "retry_check_interval", "1");
  put(os, "notification_interval", "60");
  put(os, "notification_period", "24x7");
  put(os, "notification_options", "d,u,r");
  put(os, "register", "0");
  os << "}\n\n";

  os << "define service{\n";
  put(os, "name", "generic-service");
  put(os, "is_volatile", "0");
  put(os, "active_checks_enabled", "1");
  put(os, "passive_checks_enabled", "1");
  put(os, "check_period", "24x7");
  put(os, "max_check_attempts", "3");
  put(os, "normal_check_interval", "1");
  put(os, "retry_check_interval", "1");
  put(os, "notification_interval", "60");
  put(os, "notification_period", "24x7");
  put(os, "notification_options", "w,u,c,r");
  put(os, "register", "0");
  os << "}\n\n";

  for (const auto& a : sorted) {
    os << "define host{\n";
    put(os, "use", "generic-host");
    put(os, "host_name", a.hostname);
    put(os, "alias", a.hostname + " " + std::string(to_string(a.host_class)));
    put(os, "address", a.address);
    put(os, "contact_groups", a.owner_contact_group);
    os << "}\n\n";
  }
  for (const auto& a : sorted) {
    auto it = policy.services.find(a.host_class);
    if (it == policy.services.end()) continue;
    for (const auto& s : it->second) {
      os << "define service{\n";
      put(os, "use", "generic-service");
      put(os, "host_name", a.hostname);
      put(os, "service_description", s.description);
      put(os, "check_command", s.command);
      put(os, "contact_groups", a.owner_contact_group);
      os << "}\n\n";
    }
  }
  return os.str();
}

}  // namespace sentinel::objconf
