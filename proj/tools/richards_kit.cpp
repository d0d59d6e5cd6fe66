#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "richards/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Richards equation solver and spectral experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int threads = 1;
  int step = 1;
  int iterate = 0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a scenario file");
  run->add_option("scenario", config, "Scenario .cfg file")->required()->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (overrides the scenario)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
  validate->add_option("scenario", config, "Scenario .cfg file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* dump = app.add_subcommand("export-matrix",
                                  "Write the Jacobian at one Newton iterate as Matrix Market");
  dump->add_option("scenario", config, "Scenario .cfg file")
      ->required()
      ->check(CLI::ExistingFile);
  dump->add_option("--step", step, "Time step (1-based)")->required()->check(CLI::PositiveNumber);
  dump->add_option("--iter", iterate, "Newton iterate within the step")
      ->required()
      ->check(CLI::NonNegativeNumber);
  dump->add_option("--out", out_dir, "Output directory (overrides the scenario)");

  CLI11_PARSE(app, argc, argv);

  try {
    const richards::Scenario s = richards::parse_scenario(config);
    richards::RunOptions options;
    options.output_dir = out_dir;
    options.threads = threads;
    options.log = &std::cerr;

    if (*validate) {
      std::cout << s.name << ": valid " << richards::to_string(s.experiment) << " scenario\n"
                << "# " << richards::provenance(s) << "\n";
      return 0;
    }
    if (*dump) {
      std::cout << richards::export_matrix(s, {step, iterate}, options) << "\n";
      return 0;
    }
    const int status = richards::run_scenario(s, options);
    std::cout << s.name << ": " << (status == 0 ? "converged" : "failed") << ", output in "
              << (out_dir.empty() ? s.output_dir : out_dir) << "\n";
    return status;
  } catch (const std::exception& e) {
    std::cerr << "richards-kit: " << e.what() << "\n";
    return 2;
  }
}
