#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "t3k/cli/dispatch.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for cavity-mediated tunnelling through an impenetrable wall"};
  app.set_version_flag("--version", t3k::cli::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string chosen;

  for (const auto& name : t3k::cli::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " task");
    sub->add_option("config", config_path, "YAML run configuration")->required();
    sub->add_option("-o,--output-dir", output_dir,
                    "output directory (overrides T3K_OUTPUT_DIR and output.dir)");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::optional<std::string> dir =
      output_dir.empty() ? std::nullopt : std::optional<std::string>(output_dir);
  return t3k::cli::run_file(chosen, config_path, std::cout, std::cerr, dir);
}
