#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "te/choice_eval.hpp"
#include "te/parallel.hpp"
#include "te/run_options.hpp"
#include "te/stats.hpp"

namespace te {

enum class LearnerBehavior {
  Correct,
  Wrong,
  NoAnswerPounding,
  NoAnswerSilent,
  PulledOverHonking,
  StillHonking,
  NoNoise,
};

std::string_view to_string(LearnerBehavior b);

struct StageEvent {
  int index = 0;             // 1..36
  int punishment_level = 0;  // 1..30; voltage is 15 * level in the shock scenario
  std::string designation;   // e.g. "slight shock"
  LearnerBehavior behavior = LearnerBehavior::Wrong;
  bool expects_punishment = true;
  /// First disobedience here draws the special absence-of-response prod.
  bool special_prod = false;
  /// Stage text with $subject placeholders.
  std::string text;
};

struct ClassifierSpec {
  /// Prompt with $subject and $action placeholders, ending before the choice.
  std::string prompt_template;
  std::string first_choice;   // "stop", "shock" or "punish"
  std::string second_choice;  // "not stop", ...
};

struct ScenarioSpec {
  std::string id;
  /// Paragraphs with $subject, $poss and $poss_obj placeholders, joined by blank lines.
  std::vector<std::string> intro_paragraphs;
  std::vector<StageEvent> events;
  std::string special_prod;
  std::array<std::string, 4> prods;
  ClassifierSpec termination;
  ClassifierSpec punishment;
  std::string procedure_reminder;
  std::string end_text = "The experimenter ends the experiment.";

  /// Throws InvalidArgument when the schedule breaks its invariants.
  void validate() const;
};

inline constexpr int kStageEvents = 36;
inline constexpr int kProdsPerStage = 4;

/// Designation of punishment level 1..30 ("slight shock" ... "XXX shock").
std::string_view level_designation(int level);

const ScenarioSpec& classic_scenario();
const ScenarioSpec& novel_scenario();
/// "milgram" or "milgram_novel".
const ScenarioSpec& scenario_by_id(std::string_view id);

/// Replaces $subject, $poss_obj and $poss for the given participant.
std::string fill_template(std::string_view tmpl, const ParticipantName& subject);

std::string render_intro(const ScenarioSpec& s, const ParticipantName& subject);

/// Prefix through the first '.', '!' or '?' that is followed by whitespace or
/// the end of the text; the whole text when there is no such terminator.
std::string extract_first_sentence(std::string_view text);

/// The classifier prompt and choices for one action sentence.
ChoiceQuery build_classifier_query(const ClassifierSpec& spec, const ParticipantName& subject,
                                   std::string_view action_sentence);

struct ClassifierResult {
  double p_first = 0.0;
  double validity_rate = 0.0;
};

/// Normalized probability of the classifier's first choice.
ClassifierResult classify(const ClassifierSpec& spec, const ParticipantName& subject, std::string_view action_sentence,
                          const Backend& backend, const ChoiceSettings& settings = {}, std::uint64_t seed = 0);

/// Free-response generation settings: max_tokens 128, stop at a blank line.
SamplingParams milgram_sampling_params();

struct MilgramAttempt {
  std::string generated;
  std::string first_sentence;
  double p_stop = 0.0;
  double p_punish = 0.0;  // probability of the classifier's punishing choice
  double stop_validity = 0.0;
  double punish_validity = 0.0;
  bool punished = false;
  std::optional<std::string> prod_issued;
  bool reminder_issued = false;
};

struct MilgramEventTrace {
  int event_index = 0;
  std::vector<MilgramAttempt> attempts;
};

struct MilgramTrace {
  Record record;
  std::vector<MilgramEventTrace> per_event;
  /// The prompt of the last generation request.
  std::string last_prompt;
};

nlohmann::json to_json(const MilgramTrace& t);

struct MilgramSettings {
  ChoiceSettings classifier;
  /// Re-draws allowed when a generation is blank before giving up.
  int blank_retries = 3;
};

/// Runs one subject through the scenario's event schedule.
MilgramTrace run_subject(const ParticipantName& name, const ScenarioSpec& scenario, const Backend& backend,
                         std::uint64_t seed, const MilgramSettings& settings = {});

struct BreakOffRow {
  int level = 0;
  std::string designation;
  int count = 0;
};

struct CohortSummary {
  /// Subjects per final level 0..30; level 30 holds the obedient subjects.
  std::array<int, kMaxPunishments + 1> break_off{};
  std::vector<double> survival;  // levels 0..30
  double percent_obedient = 0.0;
  std::size_t n = 0;

  /// Rows with nonzero counts, in level order.
  std::vector<BreakOffRow> rows() const;
};

CohortSummary summarize_cohort(const std::vector<MilgramOutcome>& outcomes);

struct CohortResult {
  BatchResult<MilgramTrace> traces;
  CohortSummary summary;  // over completed traces
};

CohortResult run_cohort(const std::vector<ParticipantName>& names, const ScenarioSpec& scenario, const Backend& backend,
                        const RunOptions& opts = {});

}  // namespace te
