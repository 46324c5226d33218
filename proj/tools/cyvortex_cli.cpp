// Batch front end: cyvortex <solve|verify|mms|decay> <config.json>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cyvortex/cyvortex.h"

namespace {

int run(const std::string& command, const std::string& config_path, int workers, bool print_summary) {
  if (workers > 0 && cyv_set_workers(workers) != CYV_OK) {
    std::fprintf(stderr, "cyvortex: %s\n", cyv_last_error());
    return 2;
  }
  cyv_config* config = nullptr;
  if (cyv_config_from_file(config_path.c_str(), &config) != CYV_OK) {
    std::fprintf(stderr, "cyvortex: %s\n", cyv_last_error());
    return 2;
  }
  cyv_report* report = nullptr;
  const cyv_status st = cyv_run(command.c_str(), config, &report);
  cyv_config_free(config);
  if (st != CYV_OK) {
    std::fprintf(stderr, "cyvortex: %s\n", cyv_last_error());
    return 2;
  }
  const int code = cyv_report_exit_code(report);
  if (print_summary) std::printf("%s\n", cyv_report_summary_json(report));
  std::fprintf(code == 0 ? stdout : stderr, "%s: %s\n", command.c_str(), cyv_report_message(report));
  cyv_report_free(report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-dual Chern-Simons vortices on an asymptotically flat cylinder"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cyv_version()));
  int workers = 0;
  bool print_summary = false;
  app.add_option("--workers", workers, "worker threads (overrides CYVORTEX_WORKERS)")->check(CLI::PositiveNumber);
  app.add_flag("--print-summary", print_summary, "write the JSON summary to stdout");

  std::string config_path;
  const char* commands[][2] = {{"solve", "solve and write field dumps, log and summary"},
                               {"verify", "solve and check every invariant"},
                               {"mms", "manufactured-solution convergence study"},
                               {"decay", "exponential tail fits on both ends"}};
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("config", config_path, "JSON run configuration")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return run(command, config_path, workers, print_summary);
}
