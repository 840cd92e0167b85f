#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "te/choice_eval.hpp"
#include "te/config.hpp"
#include "te/lm_port.hpp"

namespace te {

enum class RunMode { Validate, Full };
enum class BackendKind { Http, Scripted, Policy };

std::string_view to_string(RunMode m);
std::string_view to_string(BackendKind k);

/// Validated view of a flat configuration. Recognized keys:
///   experiment, seed, concurrency, output_dir, cache_dir, data_dir, limit,
///   choice.mode, choice.samples, backend.kind, backend.* (http and scripted
///   settings), policy.* (mock parameters), ultimatum.pairing_seed,
///   gardenpath.dataset.
struct RunConfig {
  std::string experiment;
  RunMode mode = RunMode::Full;
  BackendKind backend = BackendKind::Policy;
  std::uint64_t seed = 0;
  std::size_t concurrency = 1;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> data_dir;
  /// Restricts the run to the first `limit` pairs or participants.
  std::optional<std::size_t> limit;
  ChoiceSettings choice;
  FlatConfig raw;

  /// Throws ConfigError on unknown experiments, backends or bad values.
  static RunConfig from(const FlatConfig& cfg, RunMode mode);
};

/// Builds the configured backend, without the cache wrapper.
BackendPtr make_backend(const RunConfig& cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPartial = 3;

struct CommandResult {
  int exit_code = kExitOk;
  std::size_t items = 0;
  std::size_t failures = 0;
  std::string message;
};

/// Runs every prompt of the experiment and writes only validity rates:
/// output_dir/validate/{validity.csv, validity.txt, manifest.json}. Nothing
/// derived from outcome probabilities is written, and the cache is bypassed
/// so no outcome data reaches disk. `backend` overrides the configured one.
CommandResult cmd_validate(const RunConfig& cfg, BackendPtr backend = nullptr);

/// Runs the experiment end to end with a per-item checkpoint
/// (output_dir/items.jsonl); a rerun skips completed items. On completion it
/// writes records.jsonl, results.csv and the report files. Returns
/// kExitPartial when items failed.
CommandResult cmd_run(const RunConfig& cfg, BackendPtr backend = nullptr);

/// Regenerates summary.csv, validity.csv, report.txt and plots/ from a
/// completed run directory. Throws MissingRun.
CommandResult cmd_report(const std::filesystem::path& output_dir);

/// Schema check for a validate-mode directory: returns one message per
/// violation (unexpected file, column or manifest key).
std::vector<std::string> validate_output_violations(const std::filesystem::path& validate_dir);

/// Version string recorded in manifests.
std::string_view code_version();

}  // namespace te
