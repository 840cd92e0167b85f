#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "te/lm_port.hpp"

namespace te {

/// A prompt s with k valid continuations c_1..c_k: non-empty, pairwise
/// distinct, and no choice a case-insensitive prefix of another.
struct ChoiceQuery {
  std::string prompt;
  std::vector<std::string> choices;

  /// Throws EmptySet, InvalidArgument or AmbiguousChoices.
  void validate() const;
};

enum class ChoiceMode { Scored, Sampled };

std::string_view to_string(ChoiceMode m);
ChoiceMode parse_choice_mode(std::string_view s);

struct ChoiceOutcome {
  std::vector<double> probabilities;
  /// Z: total mass of valid continuations (scored) or valid fraction (sampled).
  double validity_rate = 0.0;
  ChoiceMode mode = ChoiceMode::Scored;
  std::size_t n_samples = 0;
  std::size_t n_valid = 0;
};

/// Index of the choice that `text` begins with, ignoring leading whitespace
/// and case. Throws AmbiguousChoices for choice lists that are not prefix-free.
std::optional<std::size_t> match_choice(std::string_view text, const std::vector<std::string>& choices);

/// p_i = p(s c_i) / Z with Z = sum_j p(s c_j), computed with log-sum-exp.
/// Throws CapabilityMissing or Underflow.
ChoiceOutcome evaluate_scored(const ChoiceQuery& query, const Backend& backend);

/// Generation parameters used for sampled-mode draws.
SamplingParams sampling_params_for(const ChoiceQuery& query);

/// Draws n completions and matches each against the choices. Throws NoValidSamples.
ChoiceOutcome evaluate_sampled(const ChoiceQuery& query, const Backend& backend, std::size_t n, std::uint64_t seed);

struct ChoiceSettings {
  ChoiceMode mode = ChoiceMode::Scored;
  std::size_t samples = 100;
};

/// Dispatches on settings.mode; `seed` is used only for sampling.
ChoiceOutcome evaluate(const ChoiceQuery& query, const Backend& backend, const ChoiceSettings& settings,
                       std::uint64_t seed);

}  // namespace te
