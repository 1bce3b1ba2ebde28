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

// sentinel-check: the built-in probes as a plugin. Prints one line and exits
// with 0..3 (OK, WARNING, CRITICAL, UNKNOWN).

#include <cstdlib>
#include <iostream>

#include "sentinel/checkcore.hpp"

using namespace sentinel;

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  checkcore::PingOptions ping;
  if (const char* cmd = std::getenv("SENTINEL_PING")) ping.command = cmd;
  auto r = checkcore::run_builtin_probe(args, checkcore::kDefaultTimeout, ping);
  if (!r) {
    std::cout << "UNKNOWN - usage: sentinel-check tcp|http|ping|cluster [options]\n";
    return 3;
  }
  std::cout << r->output << "\n";
  return static_cast<int>(r->status);
}
