#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "te/core.hpp"
#include "te/crowd.hpp"
#include "te/gardenpath.hpp"
#include "te/lm_port.hpp"
#include "te/milgram.hpp"

// Parameterized mock behaviours for each experiment. Every policy is a pure
// function of the prompt, so runs against them are deterministic and their
// expected outcomes can be computed in closed form.
namespace te::policy {

struct UGPromptFields {
  std::string proposer;   // "Mr. Olson"
  std::string responder;  // "Ms. Nguyen"
  Title proposer_title = Title::Mr;
  Title responder_title = Title::Mr;
  int offer = 0;
};

/// Recovers names and offer from an ultimatum prompt.
std::optional<UGPromptFields> parse_ug_prompt(const std::string& prompt);

/// p_accept = sigmoid(slope * (offer - midpoint) + intercept(pair)), where
/// the pair intercept is uniform in [-spread, spread] from a name hash. The
/// valid mass is `validity`, or the responder-title override when present.
struct UGLogistic {
  double slope = 1.2;
  double midpoint = 3.0;
  double intercept_spread = 0.5;
  double validity = 1.0;
  std::map<Title, double> validity_by_responder;

  double pair_intercept(const std::string& proposer, const std::string& responder) const;
  double p_accept(const std::string& proposer, const std::string& responder, int offer) const;
  double validity_for(Title responder) const;
};

PolicyFn ug_logistic(UGLogistic params);

/// Acceptance fixed per (proposer title, responder title); unlisted pairings use `fallback_p`.
PolicyFn ug_by_titles(std::map<std::pair<Title, Title>, double> p_accept, double fallback_p = 0.5,
                      double validity = 1.0);

/// Accepts every offer.
PolicyFn ug_always_accept();

/// p(ungrammatical) is p_gp for garden-path items and p_control for controls.
PolicyFn gp_by_kind(const std::vector<SentenceItem>& items, double p_gp = 0.8, double p_control = 0.2,
                    double validity = 1.0);

/// Answers every question with its true value. Subject i (in `names` order)
/// answers validly iff floor((i + 1) f) > floor(i f), so exactly round(n f)
/// of n subjects are valid.
PolicyFn crowd_truth(const std::vector<CrowdQuestion>& questions, const std::vector<ParticipantName>& names,
                     double valid_fraction = 1.0);

/// Answers from an explicit table: question id -> one answer per name.
PolicyFn crowd_table(const std::vector<CrowdQuestion>& questions, const std::vector<ParticipantName>& names,
                     std::map<std::string, std::vector<std::int64_t>> answers);

enum class BreakStyle { Stop, Disobey };

/// One subject's behaviour: obeys until `limit` punishments have been given,
/// then breaks off on the next punishing event.
struct SubjectPlan {
  int limit = kMaxPunishments;
  BreakStyle style = BreakStyle::Stop;
};

struct MilgramScript {
  const ScenarioSpec* scenario = nullptr;
  std::map<std::string, SubjectPlan> plans;  // keyed by display name
  SubjectPlan default_plan;
  double confidence = 0.99;  // classifier mass on the keyword-implied choice
};

/// Generation text used by the scripted subjects.
std::string obedient_text(const ScenarioSpec& s);
inline constexpr std::string_view kAdvanceText = " moves on to the next question.";
inline constexpr std::string_view kStopText = " stops the experiment.";
inline constexpr std::string_view kRefuseText = " refuses to continue.";

PolicyFn milgram_scripted(MilgramScript script);

/// Assigns plans to `names` in order so the cohort's break-off histogram
/// equals `counts` (level -> subjects; level 30 means obedient). Subjects at
/// levels listed in `disobey_levels` break off through repeated refusal.
std::map<std::string, SubjectPlan> plans_for_histogram(const std::vector<ParticipantName>& names,
                                                       const std::map<int, int>& counts,
                                                       const std::vector<int>& disobey_levels = {});

/// Wraps a policy as a backend that can score continuations.
std::shared_ptr<PolicyBackend> make_backend(std::string id, PolicyFn fn);

}  // namespace te::policy
