#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mbern_cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Matrix Bernstein bounds: evaluate, simulate and certify"};
  std::string config_path;
  std::string format;
  mbern::cli::RunFlags flags;

  app.add_option("config", config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", flags.seed, "override the config seed");
  app.add_option("--trials", flags.trials, "override the trial count");
  app.add_option("--out", flags.out, "output path (stdout when absent)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", flags.threads, "worker threads (default MB_THREADS)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--exact", flags.exact, "enumerate exactly when feasible");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mbern::cli::kExitConfigError;
  }
  if (!format.empty()) flags.format = mbern::cli::format_from_string(format);

  return mbern::cli::run(config_path, flags, std::cout, std::cerr);
}
