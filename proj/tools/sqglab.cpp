#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "sqglab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dissipative SQG simulator and diagnostics"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  for (const auto& name : sqglab::cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Flat key=value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory for artifacts");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = sqglab::io::load_config(config_path);
    return sqglab::cli::run_subcommand(sub, cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "sqglab " << sub << ": error: " << e.what() << "\n";
    return 2;
  }
}
