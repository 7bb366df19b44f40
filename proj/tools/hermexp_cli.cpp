// command line driver: runs experiment configs and reports row failures
// through the exit code (0 all pass, 1 row failures, 2 bad config, 3 runtime
// error)

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hermexp/experiment.hpp"

namespace {

struct SubArgs {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite expansion experiment driver"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"expand", "expansion error experiments"},
      {"rates", "convergence rate experiments"},
      {"kernels", "Hermite kernel identity experiments"},
      {"norms", "kernel norm bound experiments"},
      {"holo", "subordinated semigroup experiments"},
      {"fejer", "Fejer family experiments"},
      {"laguerre-compare", "Hermite vs Laguerre comparison experiments"},
      {"verify-all", "every experiment in the config"}};

  SubArgs args;
  for (const auto& [name, desc] : kinds) {
    CLI::App* sub = app.add_subcommand(name, "Run " + desc);
    sub->add_option("--config", args.config_path, "JSON config file")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory (default .)");
    sub->add_option("--threads", args.threads, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "override the config seed");
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  const std::string kind = sub->get_name();
  std::optional<std::uint64_t> seed_override;
  if (sub->count("--seed") > 0) seed_override = args.seed;

  std::ifstream ifs(args.config_path, std::ios::binary);
  if (!ifs) {
    std::cerr << "config error: cannot open '" << args.config_path << "'\n";
    return 2;
  }
  std::ostringstream buf;
  buf << ifs.rdbuf();

  try {
    const hermexp::RunResult result = hermexp::run_experiments(
        buf.str(), kind == "verify-all" ? "" : kind, args.out_dir, args.threads,
        seed_override);

    size_t failures = 0;
    for (const auto& row : result.rows)
      if (!row.pass) ++failures;
    std::cout << result.rows.size() << " rows, " << failures << " failing\n";
    size_t shown = 0;
    for (const auto& row : result.rows) {
      if (row.pass) continue;
      if (++shown > 20) {
        std::cout << "  ... and " << (failures - 20) << " more\n";
        break;
      }
      std::cout << "  FAIL " << row.experiment_id << " " << row.param_json
                << " value=" << row.value << "\n";
    }
    for (const auto& name : result.files_written)
      std::cout << "wrote " << args.out_dir << "/" << name << "\n";
    return failures == 0 ? 0 : 1;
  } catch (const hermexp::ConfigError& err) {
    std::cerr << "config error" << (err.violations.size() > 1 ? "s" : "")
              << ":\n";
    for (const auto& v : err.violations) std::cerr << "  " << v << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
}
