#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "te/core.hpp"

namespace te {

enum class FinishReason { Stop, Length, Other };

std::string_view to_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view s);

struct TokenScore {
  std::string token;
  double logprob = 0.0;
  bool operator==(const TokenScore&) const = default;
};

struct Completion {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  /// When present, the tokens concatenate to `text`.
  std::optional<std::vector<TokenScore>> token_scores;

  bool operator==(const Completion&) const = default;
};

nlohmann::json to_json(const Completion& c);
Completion completion_from_json(const nlohmann::json& j);

struct BackendCapabilities {
  bool can_score_continuations = true;
  std::size_t max_prompt_chars = 1'000'000;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Applies the leading-space rule: a continuation is scored as " c" when the
/// prompt does not end in whitespace and c does not already start with it.
std::string scoring_continuation(std::string_view prompt, std::string_view continuation);

/// Truncates `text` at the earliest stop sequence. Returns true if one was found.
bool apply_stop_sequences(std::string& text, const std::vector<std::string>& stops);

/// A completion-style language model. Public entry points validate inputs and
/// then delegate; implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Throws PromptTooLong, BackendUnavailable, MalformedResponse.
  Completion complete(const std::string& prompt, const SamplingParams& params, std::uint64_t seed) const;

  /// log p(continuation | prompt), summed over continuation tokens; <= 0 or -inf.
  /// Throws CapabilityMissing, TokenizationMismatch.
  double score(const std::string& prompt, const std::string& continuation) const;

  virtual std::string id() const = 0;
  virtual BackendCapabilities capabilities() const = 0;

 protected:
  virtual Completion do_complete(const std::string& prompt, const SamplingParams& params,
                                 std::uint64_t seed) const = 0;
  /// `continuation` already has the leading-space rule applied.
  virtual double do_score(const std::string& prompt, const std::string& continuation) const = 0;

 private:
  void check_prompt(const std::string& prompt) const;
};

using BackendPtr = std::shared_ptr<const Backend>;

enum class MatchMode { Exact, Suffix, Contains };

/// Table-driven mock. Completion rules map prompts to fixed texts (or a
/// weighted list drawn by seed); score rules declare token logprobs for a
/// continuation of a matching prompt.
///
/// JSON layout:
///   {"id": "...", "can_score": true, "max_prompt_chars": N,
///    "completions": [{"prompt": "...", "match": "exact|suffix|contains",
///                     "text": "..." | "samples": [{"text": "...", "weight": w}],
///                     "finish_reason": "stop"}],
///    "scores": [{"prompt": "...", "match": "...",
///                "tokens": [[" tok", -1.0], ...] | "continuation": " c", "mass": 0.3}]}
class ScriptedBackend final : public Backend {
 public:
  struct Sample {
    std::string text;
    double weight = 1.0;
  };
  struct CompletionRule {
    MatchMode match = MatchMode::Exact;
    std::string prompt;
    std::vector<Sample> samples;
    FinishReason finish_reason = FinishReason::Stop;
  };
  struct ScoreRule {
    MatchMode match = MatchMode::Exact;
    std::string prompt;
    std::vector<TokenScore> tokens;
  };

  ScriptedBackend(std::string id, std::vector<CompletionRule> completions, std::vector<ScoreRule> scores,
                  BackendCapabilities caps = {});

  static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& j);
  static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

  std::string id() const override { return id_; }
  BackendCapabilities capabilities() const override { return caps_; }

  std::uint64_t calls() const { return calls_.load(); }

 protected:
  Completion do_complete(const std::string& prompt, const SamplingParams& params, std::uint64_t seed) const override;
  double do_score(const std::string& prompt, const std::string& continuation) const override;

 private:
  std::string id_;
  std::vector<CompletionRule> completions_;
  std::vector<ScoreRule> scores_;
  BackendCapabilities caps_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// One full completion a policy may produce, with its probability mass.
struct PolicyOption {
  std::string text;
  double mass = 0.0;
};

/// Maps a prompt to a distribution over full completions. Masses sum to at
/// most 1; the remainder goes to the policy's fallback (invalid) text.
using PolicyFn = std::function<std::vector<PolicyOption>(const std::string& prompt)>;

/// Parameterized mock: completions are drawn from the policy's distribution
/// with a seed derived from (seed, prompt); score(c) is the log of the total
/// mass of options beginning with c.
class PolicyBackend final : public Backend {
 public:
  PolicyBackend(std::string id, PolicyFn policy, std::string fallback_text = " ...", BackendCapabilities caps = {});

  std::string id() const override { return id_; }
  BackendCapabilities capabilities() const override { return caps_; }

  std::uint64_t calls() const { return calls_.load(); }

 protected:
  Completion do_complete(const std::string& prompt, const SamplingParams& params, std::uint64_t seed) const override;
  double do_score(const std::string& prompt, const std::string& continuation) const override;

 private:
  std::vector<PolicyOption> options_for(const std::string& prompt) const;

  std::string id_;
  PolicyFn policy_;
  std::string fallback_;
  BackendCapabilities caps_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace te
