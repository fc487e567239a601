// Command line driver: fibersolve run <case.cfg> [--preset NAME] [--full] [--out DIR]
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "fibersolve/runner.hpp"

int main(int argc, char** argv) {
  using namespace fibersolve;
  CLI::App app{"Embedded-fiber matrix solver"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "solve a case file or a named preset");
  std::string case_file, preset, out_dir;
  bool full = false;
  run->add_option("case", case_file, "case configuration file");
  run->add_option("--preset", preset, "named benchmark case")
      ->check(CLI::IsMember({"bending", "torsion", "shear", "rve"}));
  run->add_flag("--full", full, "full-size RVE (long running)");
  run->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CaseConfig cfg;
  try {
    if (!preset.empty() && !case_file.empty()) throw Error(ErrorCode::ValidationError, "give a case file or a preset, not both");
    if (preset.empty() && case_file.empty()) throw Error(ErrorCode::ValidationError, "no case file or preset given");
    cfg = preset.empty() ? load_case(case_file) : presets::by_name(preset, full);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    cfg.validate();
  } catch (const Error& e) {
    std::fprintf(stderr, "config error (%s): %s\n", error_name(e.code()), e.what());
    return 1;
  }

  try {
    const RunResult res = run_case(cfg);
    std::cout << summary_text(cfg, res);
    for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
    if (!res.report.converged) {
      std::fprintf(stderr, "solver failure: %s\n", res.report.message.c_str());
      return 2;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", error_name(e.code()), e.what());
    return e.code() == ErrorCode::IoError ? 1 : 2;
  }
  return 0;
}
