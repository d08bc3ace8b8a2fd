#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace nldg::cli;
  CLI::App app{"Nonlinear Dirac equation on star graphs"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool verbose = false;

  const char* verbs[] = {"soliton", "evolve", "branch", "nonrel", "resolvent-check"};
  const char* help[] = {"sample the NLS soliton and its constants",
                        "evolve initial data with the split-step integrator",
                        "continue the standing-wave branch in eps",
                        "nonrelativistic-limit sweep over c",
                        "cross-check the 3-star resolvent kernel"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(verbs[i], help[i]);
    sub->add_option("--config", config_path, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed for vector checks");
    sub->add_flag("--verbose,-v", verbose, "report progress on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Command command = parse_command(chosen->get_name());
  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (chosen->count("--out")) config.out_dir = out_dir;
  if (chosen->count("--seed")) config.rng_seed = seed;
  return execute(command, config, verbose, std::cerr);
}
