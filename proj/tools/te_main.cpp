#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "te/error.hpp"
#include "te/harness.hpp"

namespace {

struct Args {
  std::string config;
  std::optional<std::string> experiment;
  std::optional<std::int64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> output_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Args& a, bool config_required) {
  auto* opt = cmd->add_option("--config", a.config, "Configuration file (key = value)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--experiment", a.experiment, "ultimatum | gardenpath | milgram | milgram_novel | crowd");
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--backend", a.backend, "http | scripted | policy");
  cmd->add_option("--output-dir", a.output_dir, "Output directory");
  cmd->add_option("--set", a.overrides, "Override a config key (key=value); repeatable");
}

te::FlatConfig load_config(const Args& a) {
  te::FlatConfig cfg = te::FlatConfig::load(a.config);
  for (const auto& o : a.overrides) cfg.apply_override(o);
  if (a.experiment) cfg.set("experiment", *a.experiment);
  if (a.seed) cfg.set("seed", std::to_string(*a.seed));
  if (a.backend) cfg.set("backend.kind", *a.backend);
  if (a.output_dir) cfg.set("output_dir", *a.output_dir);
  return cfg;
}

int finish(const te::CommandResult& r) {
  std::cout << r.message << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"te: run simulated human-subject experiments against language models"};
  app.require_subcommand(1);
  Args validate_args, run_args, report_args;
  auto* validate = app.add_subcommand("validate", "Report validity rates only (no outcome data)");
  auto* run = app.add_subcommand("run", "Run an experiment end to end (resumable)");
  auto* report = app.add_subcommand("report", "Regenerate tables and plot data for a completed run");
  add_common(validate, validate_args, true);
  add_common(run, run_args, true);
  report->add_option("--config", report_args.config, "Configuration file naming output_dir")->check(CLI::ExistingFile);
  report->add_option("--output-dir", report_args.output_dir, "Completed run directory");
  report->add_option("--set", report_args.overrides, "Override a config key (key=value); repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? te::kExitOk : te::kExitConfig;
  }

  try {
    if (*validate) {
      return finish(te::cmd_validate(te::RunConfig::from(load_config(validate_args), te::RunMode::Validate)));
    }
    if (*run) return finish(te::cmd_run(te::RunConfig::from(load_config(run_args), te::RunMode::Full)));
    std::string dir;
    if (report_args.output_dir) {
      dir = *report_args.output_dir;
    } else if (!report_args.config.empty()) {
      dir = load_config(report_args).get_string("output_dir");
    } else {
      throw te::Error(te::ErrorCode::ConfigError, "report needs --output-dir or --config");
    }
    return finish(te::cmd_report(dir));
  } catch (const te::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == te::ErrorCode::ConfigError ? te::kExitConfig : te::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return te::kExitFailure;
  }
}
