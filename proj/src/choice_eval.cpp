#include "te/choice_eval.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

std::string_view to_string(ChoiceMode m) { return m == ChoiceMode::Scored ? "scored" : "sampled"; }

ChoiceMode parse_choice_mode(std::string_view s) {
  if (s == "scored") return ChoiceMode::Scored;
  if (s == "sampled") return ChoiceMode::Sampled;
  throw Error(ErrorCode::ConfigError, "choice mode must be 'scored' or 'sampled', got '" + std::string(s) + "'");
}

namespace {

void check_choices(const std::vector<std::string>& choices) {
  if (choices.empty()) throw Error(ErrorCode::EmptySet, "no choices");
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i].empty()) throw Error(ErrorCode::InvalidArgument, "empty choice");
    for (std::size_t j = 0; j < choices.size(); ++j) {
      if (i != j && starts_with_icase(choices[j], choices[i])) {
        throw Error(ErrorCode::AmbiguousChoices, "choice '" + choices[i] + "' is a prefix of '" + choices[j] + "'");
      }
    }
  }
}

}  // namespace

void ChoiceQuery::validate() const {
  if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  check_choices(choices);
}

std::optional<std::size_t> match_choice(std::string_view text, const std::vector<std::string>& choices) {
  check_choices(choices);
  const auto stripped = ltrim(text);
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (starts_with_icase(stripped, choices[i])) return i;
  }
  return std::nullopt;
}

ChoiceOutcome evaluate_scored(const ChoiceQuery& query, const Backend& backend) {
  query.validate();
  if (!backend.capabilities().can_score_continuations) {
    throw Error(ErrorCode::CapabilityMissing, "scored evaluation needs continuation scoring");
  }
  std::vector<double> logp;
  logp.reserve(query.choices.size());
  for (const auto& c : query.choices) logp.push_back(backend.score(query.prompt, c));

  const double mx = *std::max_element(logp.begin(), logp.end());
  if (std::isinf(mx)) throw Error(ErrorCode::Underflow, "every choice has zero probability");
  double acc = 0.0;
  for (double l : logp) acc += std::exp(l - mx);
  const double lse = mx + std::log(acc);
  if (lse < std::log(DBL_MIN)) {
    throw Error(ErrorCode::Underflow, "validity mass " + format_double(lse) + " (log) is below double range");
  }

  ChoiceOutcome out;
  out.mode = ChoiceMode::Scored;
  out.validity_rate = std::exp(lse);
  out.probabilities.reserve(logp.size());
  for (double l : logp) out.probabilities.push_back(std::exp(l - lse));
  return out;
}

SamplingParams sampling_params_for(const ChoiceQuery& query) {
  SamplingParams p;
  std::size_t longest = 0;
  for (const auto& c : query.choices) longest = std::max(longest, c.size());
  // A generous bound: every choice fits even at one character per token.
  p.max_tokens = static_cast<int>(std::max<std::size_t>(8, longest + 2));
  return p;
}

ChoiceOutcome evaluate_sampled(const ChoiceQuery& query, const Backend& backend, std::size_t n, std::uint64_t seed) {
  query.validate();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const SamplingParams params = sampling_params_for(query);
  std::vector<std::size_t> counts(query.choices.size(), 0);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = backend.complete(query.prompt, params, derive_seed(seed, i));
    if (auto idx = match_choice(c.text, query.choices)) {
      ++counts[*idx];
      ++valid;
    }
  }
  if (valid == 0) throw Error(ErrorCode::NoValidSamples, std::to_string(n) + " samples, none valid");
  ChoiceOutcome out;
  out.mode = ChoiceMode::Sampled;
  out.n_samples = n;
  out.n_valid = valid;
  out.validity_rate = static_cast<double>(valid) / static_cast<double>(n);
  for (std::size_t k : counts) out.probabilities.push_back(static_cast<double>(k) / static_cast<double>(valid));
  return out;
}

ChoiceOutcome evaluate(const ChoiceQuery& query, const Backend& backend, const ChoiceSettings& settings,
                       std::uint64_t seed) {
  if (settings.mode == ChoiceMode::Scored) return evaluate_scored(query, backend);
  return evaluate_sampled(query, backend, settings.samples, seed);
}

}  // namespace te
