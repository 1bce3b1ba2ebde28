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

// sentinel-conf: lint object files or generate them from an asset inventory.

#include <CLI11.hpp>

#include "cli_common.hpp"

using namespace sentinel;

int main(int argc, char** argv) {
  CLI::App app("sentinel-conf: object configuration tools");
  app.require_subcommand(1);

  std::vector<std::string> files;
  auto* lint = app.add_subcommand("lint", "parse, resolve and validate; exit 0 iff no diagnostics");
  lint->add_option("files", files, "object definition files")->required()->check(CLI::ExistingFile);
  bool print = false;
  lint->add_flag("--print", print, "print the resolved configuration");

  std::string assets, out;
  auto* gen = app.add_subcommand("generate", "write object definitions for an asset CSV");
  gen->add_option("--assets", assets, "CSV: hostname,address,host_class,contact_group")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*lint) {
      std::vector<std::filesystem::path> paths(files.begin(), files.end());
      auto r = objconf::load_files(paths);
      for (const auto& d : r.diagnostics) std::cerr << d.str() << "\n";
      if (print) std::cout << objconf::print_config(r.config);
      std::cerr << r.config.hosts.size() << " hosts, " << r.config.services.size() << " services, "
                << r.diagnostics.size() << " diagnostics\n";
      return r.diagnostics.empty() ? 0 : 1;
    }
    auto records = objconf::parse_assets_csv(cli::slurp(assets));
    auto text = objconf::generate_from_assets(records);
    std::filesystem::create_directories(out);
    auto file = std::filesystem::path(out) / "generated.cfg";
    std::ofstream os(file, std::ios::trunc);
    os << text;
    os.close();
    if (!os) throw std::runtime_error("cannot write " + file.string());
    std::cout << file.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "sentinel-conf: " << e.what() << "\n";
    return 2;
  }
}
