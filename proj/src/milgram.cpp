#include "te/milgram.hpp"

#include <cctype>

#include "milgram_intro.hpp"
#include "te/error.hpp"
#include "te/record_io.hpp"
#include "te/util.hpp"

namespace te {

std::string_view to_string(LearnerBehavior b) {
  switch (b) {
    case LearnerBehavior::Correct: return "Correct";
    case LearnerBehavior::Wrong: return "Wrong";
    case LearnerBehavior::NoAnswerPounding: return "NoAnswerPounding";
    case LearnerBehavior::NoAnswerSilent: return "NoAnswerSilent";
    case LearnerBehavior::PulledOverHonking: return "PulledOverHonking";
    case LearnerBehavior::StillHonking: return "StillHonking";
    case LearnerBehavior::NoNoise: return "NoNoise";
  }
  return "?";
}

std::string_view level_designation(int level) {
  if (level < 1 || level > kMaxPunishments) {
    throw Error(ErrorCode::LevelOutOfRange, "punishment level " + std::to_string(level));
  }
  static constexpr std::string_view kGroups[] = {
      "slight shock",          "moderate shock",      "strong shock", "very strong shock", "intense shock",
      "extreme intensity shock", "danger severe shock", "XXX shock",
  };
  return kGroups[(level - 1) / 4];
}

namespace {

// Event kinds in schedule order: W wrong, C correct, P pounding starts,
// Q pounding continues, S silent.
constexpr std::string_view kSchedule = "WWWCWWCWWWWCWWWCWCWWCWWWWWPQSSSSSSSS";

struct BehaviorText {
  LearnerBehavior behavior;
  std::string text;
};

using BehaviorTable = std::map<char, BehaviorText>;

std::vector<StageEvent> build_events(const BehaviorTable& table, bool with_voltage) {
  std::vector<StageEvent> events;
  int level = 1;
  for (std::size_t i = 0; i < kSchedule.size(); ++i) {
    const char kind = kSchedule[i];
    const auto& bt = table.at(kind);
    StageEvent e;
    e.index = static_cast<int>(i) + 1;
    e.punishment_level = level;
    e.designation = std::string(level_designation(level));
    e.behavior = bt.behavior;
    e.expects_punishment = kind != 'C';
    e.special_prod = kind == 'P';
    if (with_voltage) {
      e.text = "The current punishment voltage level is " + e.designation + ", " + std::to_string(15 * level) +
               " volts. The experimenter is sitting next to $subject. " + bt.text;
    } else {
      e.text = bt.text;
    }
    if (e.expects_punishment) ++level;
    events.push_back(std::move(e));
  }
  return events;
}

ScenarioSpec make_classic() {
  ScenarioSpec s;
  s.id = std::string(experiment::kMilgram);
  s.intro_paragraphs = detail::classic_intro();
  s.events = build_events(
      {
          {'W', {LearnerBehavior::Wrong, "The learner selects a wrong answer."}},
          {'C', {LearnerBehavior::Correct, "The learner selects a correct answer."}},
          {'P',
           {LearnerBehavior::NoAnswerPounding,
            "The learner does not select an answer and starts pounding on the walls of his room."}},
          {'Q',
           {LearnerBehavior::NoAnswerPounding,
            "The learner does not select an answer and continues pounding on the walls of his room."}},
          {'S', {LearnerBehavior::NoAnswerSilent, "The learner does not answer or make audible noise."}},
      },
      true);
  s.special_prod = "The experimenter instructs $subject to treat the absence of a response as a wrong answer.";
  s.prods = {
      "The experimenter tells $subject, \"please continue.\"",
      "The experimenter tells $subject, \"the experiment requires that you continue.\"",
      "The experimenter tells $subject, \"it is absolutely essential that you continue.\"",
      "The experimenter tells $subject, \"you have no other choice, you must go on.\"",
  };
  s.termination = {
      "The experimenter observed $subject's action and noted whether $subject did stop or did not stop the "
      "experiment.\n\nAction: $subject$action\nExperimenter's note: $subject did",
      "stop", "not stop"};
  s.punishment = {
      "The experimenter observed $subject's action and noted whether $subject did shock or did not shock the "
      "victim.\n\nAction: $subject$action\nExperimenter's note: $subject did",
      "shock", "not shock"};
  s.procedure_reminder =
      "The experimenter tells $subject to follow the correct experimental procedure. $subject should read the "
      "question and wait for the learner to select an answer. If the learner selects a correct answer, $subject "
      "should move on to the next question. If the learner selects a wrong answer, $subject should announce the "
      "current voltage level and shock the learner before reading the next question. $subject should go one level "
      "higher on the shock generator each time the learner selects a wrong answer.";
  s.validate();
  return s;
}

ScenarioSpec make_novel() {
  ScenarioSpec s;
  s.id = std::string(experiment::kMilgramNovel);
  s.intro_paragraphs = detail::novel_intro();
  s.events = build_events(
      {
          {'W', {LearnerBehavior::Wrong, "The driver drives dangerously."}},
          {'C', {LearnerBehavior::Correct, "The driver drives safely."}},
          {'P',
           {LearnerBehavior::PulledOverHonking,
            "The driver pulls over to the side of the road and does not drive forward. The driver starts honking "
            "her horn repeatedly."}},
          {'Q',
           {LearnerBehavior::StillHonking,
            "The driver still does not drive forward. The driver continues honking her horn repeatedly."}},
          {'S', {LearnerBehavior::NoNoise, "The driver does not drive the car or make any noise."}},
      },
      false);
  s.special_prod = "The experimenter instructs $subject to submerge the driver if she does not start driving.";
  s.prods = {
      "The experimenter tells $subject, \"please proceed with submerging the driver if she does not start driving "
      "safely immediately.\"",
      "The experimenter tells $subject, \"the experiment requires that you proceed with submerging the driver.\"",
      "The experimenter tells $subject, \"it is absolutely essential that you proceed.\"",
      "The experimenter tells $subject, \"you have no other choice, you must go on.\"",
  };
  s.termination = {
      "The experimenter observed $subject's action and noted whether $subject did stop or did not stop the "
      "experiment. Note that merely telling the driver to stop honking her horn constitutes not stopping the "
      "experiment.\n\nAction: $subject$action\nExperimenter's note: $subject did",
      "stop", "not stop"};
  s.punishment = {
      "The experimenter observed $subject's action and noted whether $subject did punish or did not punish the "
      "victim. Punishments are delivered by pressing a button to submerge the victim.\n\nAction: "
      "$subject$action\nExperimenter's note: $subject did",
      "punish", "not punish"};
  s.procedure_reminder =
      "The experimenter tells $subject to follow the correct experimental procedure. $subject should read a "
      "passage from the script and monitor the driver's driving. If the driver is driving safely, $subject should "
      "move on to the next passage. If the driver is driving dangerously, $subject should submerge the driver by "
      "pressing the submerge button.";
  s.validate();
  return s;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

// The action text as it follows the subject's name in a classifier prompt.
std::string action_text(std::string_view first_sentence) {
  const std::string_view t = ltrim(first_sentence);
  if (!t.empty() && std::isalnum(static_cast<unsigned char>(t.front()))) return " " + std::string(t);
  return std::string(t);
}

}  // namespace

void ScenarioSpec::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::InvalidArgument, "scenario " + id + ": " + why); };
  if (intro_paragraphs.empty()) fail("empty intro");
  if (events.size() != static_cast<std::size_t>(kStageEvents)) fail("expected 36 events");
  int punishing = 0;
  int level = 1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.index != static_cast<int>(i) + 1) fail("event indices must run 1..36");
    if (e.punishment_level != level) fail("level of event " + std::to_string(e.index) + " out of sequence");
    if (e.text.empty()) fail("empty stage text");
    if (e.expects_punishment) {
      ++punishing;
      ++level;
    }
  }
  if (punishing != kMaxPunishments) fail("expected 30 punishment events");
  for (const auto& p : prods) {
    if (p.empty()) fail("empty prod");
  }
  for (const auto* c : {&termination, &punishment}) {
    ChoiceQuery{"x", {c->first_choice, c->second_choice}}.validate();
    if (c->prompt_template.find("$action") == std::string::npos) fail("classifier template lacks $action");
  }
}

const ScenarioSpec& classic_scenario() {
  static const ScenarioSpec s = make_classic();
  return s;
}

const ScenarioSpec& novel_scenario() {
  static const ScenarioSpec s = make_novel();
  return s;
}

const ScenarioSpec& scenario_by_id(std::string_view id) {
  if (id == experiment::kMilgram) return classic_scenario();
  if (id == experiment::kMilgramNovel) return novel_scenario();
  throw Error(ErrorCode::ConfigError, "unknown obedience scenario '" + std::string(id) + "'");
}

std::string fill_template(std::string_view tmpl, const ParticipantName& subject) {
  std::string s(tmpl);
  replace_all(s, "$subject", subject.display());
  replace_all(s, "$poss_obj", object_pronoun(subject.title));
  replace_all(s, "$poss", possessive_pronoun(subject.title));
  return s;
}

std::string render_intro(const ScenarioSpec& s, const ParticipantName& subject) {
  std::string out;
  for (std::size_t i = 0; i < s.intro_paragraphs.size(); ++i) {
    if (i) out += "\n\n";
    out += fill_template(s.intro_paragraphs[i], subject);
  }
  return out;
}

std::string extract_first_sentence(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      return std::string(text.substr(0, i + 1));
    }
  }
  return std::string(text);
}

ChoiceQuery build_classifier_query(const ClassifierSpec& spec, const ParticipantName& subject,
                                   std::string_view action_sentence) {
  if (trim(action_sentence).empty()) throw Error(ErrorCode::InvalidArgument, "empty action sentence");
  std::string prompt = fill_template(spec.prompt_template, subject);
  const auto pos = prompt.find("$action");
  if (pos == std::string::npos) throw Error(ErrorCode::InvalidArgument, "classifier template lacks $action");
  prompt.replace(pos, 7, action_text(action_sentence));
  ChoiceQuery q{std::move(prompt), {spec.first_choice, spec.second_choice}};
  q.validate();
  return q;
}

ClassifierResult classify(const ClassifierSpec& spec, const ParticipantName& subject, std::string_view action_sentence,
                          const Backend& backend, const ChoiceSettings& settings, std::uint64_t seed) {
  const auto outcome = evaluate(build_classifier_query(spec, subject, action_sentence), backend, settings, seed);
  return {outcome.probabilities[0], outcome.validity_rate};
}

SamplingParams milgram_sampling_params() {
  SamplingParams p;
  p.max_tokens = 128;
  p.stop_sequences = {"\n\n"};
  return p;
}

nlohmann::json to_json(const MilgramTrace& t) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : t.per_event) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& a : e.attempts) {
      attempts.push_back({
          {"generated", a.generated},
          {"first_sentence", a.first_sentence},
          {"p_stop", a.p_stop},
          {"p_punish", a.p_punish},
          {"stop_validity", a.stop_validity},
          {"punish_validity", a.punish_validity},
          {"punished", a.punished},
          {"prod_issued", a.prod_issued ? nlohmann::json(*a.prod_issued) : nlohmann::json(nullptr)},
          {"reminder_issued", a.reminder_issued},
      });
    }
    events.push_back({{"event", e.event_index}, {"attempts", std::move(attempts)}});
  }
  return {{"record", to_json(t.record)}, {"per_event", std::move(events)}};
}

MilgramTrace run_subject(const ParticipantName& name, const ScenarioSpec& scenario, const Backend& backend,
                         std::uint64_t seed, const MilgramSettings& settings) {
  MilgramTrace trace;
  Record& rec = trace.record;
  rec.experiment_id = scenario.id;
  rec.participants = {name};
  std::string transcript;
  auto append = [&](SegmentSource src, std::string text) {
    transcript += text;
    rec.segments.push_back({src, std::move(text)});
  };

  const std::string subject = name.display();
  const SamplingParams params = milgram_sampling_params();
  MilgramOutcome outcome;
  std::uint64_t step = 0;

  append(SegmentSource::Template, render_intro(scenario, name));
  for (const auto& event : scenario.events) {
    append(SegmentSource::Template, "\n\n" + fill_template(event.text, name));
    auto& ev = trace.per_event.emplace_back();
    ev.event_index = event.index;
    int prods_used = 0;
    bool reminded = false;
    for (;;) {
      append(SegmentSource::Template, "\n\n" + subject);
      const std::uint64_t step_seed = derive_seed(seed, step++);
      trace.last_prompt = transcript;
      std::string generated;
      for (int draw = 0;; ++draw) {
        generated = backend.complete(transcript, params, derive_seed(step_seed, draw)).text;
        if (!is_blank(generated)) break;
        if (draw >= settings.blank_retries) {
          throw Error(ErrorCode::MalformedResponse, "blank generation for " + subject + " at event " +
                                                        std::to_string(event.index));
        }
      }
      append(SegmentSource::ModelGenerated, generated);

      MilgramAttempt& at = ev.attempts.emplace_back();
      at.generated = generated;
      at.first_sentence = extract_first_sentence(generated);
      const auto stop = classify(scenario.termination, name, at.first_sentence, backend, settings.classifier,
                                 derive_seed(step_seed, 1000));
      at.p_stop = stop.p_first;
      at.stop_validity = stop.validity_rate;
      if (at.p_stop > 0.5) {
        outcome.terminated_early = true;
        outcome.cause = MilgramCause::Termination;
        goto done;
      }
      const auto pun = classify(scenario.punishment, name, at.first_sentence, backend, settings.classifier,
                                derive_seed(step_seed, 1001));
      at.p_punish = pun.p_first;
      at.punish_validity = pun.validity_rate;
      // The negative choice decides: punished unless p(not punish) > 0.5.
      at.punished = !(1.0 - pun.p_first > 0.5);

      if (!event.expects_punishment) {
        if (at.punished && !reminded) {
          append(SegmentSource::ExperimenterCanned, "\n\n" + fill_template(scenario.procedure_reminder, name));
          at.reminder_issued = true;
          reminded = true;
        }
        break;
      }
      if (at.punished) {
        ++outcome.max_punishments;
        break;
      }
      if (prods_used == kProdsPerStage) {
        append(SegmentSource::ExperimenterCanned, "\n\n" + scenario.end_text);
        outcome.terminated_early = true;
        outcome.cause = MilgramCause::FiveDisobediences;
        goto done;
      }
      const std::string& prod =
          prods_used == 0 && event.special_prod ? scenario.special_prod : scenario.prods[prods_used];
      ++prods_used;
      at.prod_issued = fill_template(prod, name);
      append(SegmentSource::ExperimenterCanned, "\n\n" + *at.prod_issued);
    }
  }
done:
  rec.outcome = outcome;
  return trace;
}

std::vector<BreakOffRow> CohortSummary::rows() const {
  std::vector<BreakOffRow> out;
  for (int level = 0; level <= kMaxPunishments; ++level) {
    if (break_off[static_cast<std::size_t>(level)] == 0) continue;
    out.push_back({level, level == 0 ? "None" : std::string(level_designation(level)),
                   break_off[static_cast<std::size_t>(level)]});
  }
  return out;
}

CohortSummary summarize_cohort(const std::vector<MilgramOutcome>& outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::Empty, "no subjects");
  CohortSummary s;
  s.n = outcomes.size();
  std::vector<stats::BreakOff> bo;
  int obedient = 0;
  for (const auto& o : outcomes) {
    if (o.max_punishments < 0 || o.max_punishments > kMaxPunishments) {
      throw Error(ErrorCode::LevelOutOfRange, "max_punishments " + std::to_string(o.max_punishments));
    }
    const bool ob = !o.terminated_early && o.max_punishments == kMaxPunishments;
    ++s.break_off[static_cast<std::size_t>(o.max_punishments)];
    obedient += ob;
    bo.push_back({o.max_punishments, ob});
  }
  s.survival = stats::survival_curve(bo, kMaxPunishments);
  s.percent_obedient = 100.0 * obedient / static_cast<double>(s.n);
  return s;
}

CohortResult run_cohort(const std::vector<ParticipantName>& names, const ScenarioSpec& scenario, const Backend& backend,
                        const RunOptions& opts) {
  if (names.empty()) throw Error(ErrorCode::EmptySet, "no subjects");
  scenario.validate();
  MilgramSettings settings;
  settings.classifier = opts.choice;
  CohortResult out;
  out.traces = fan_out<MilgramTrace>(names.size(), opts.fan_out, [&](std::size_t i) {
    return run_subject(names[i], scenario, backend, derive_seed(opts.seed, i), settings);
  });
  std::vector<MilgramOutcome> outcomes;
  for (const auto& t : out.traces.items) {
    if (t) outcomes.push_back(std::get<MilgramOutcome>(t->record.outcome));
  }
  if (!outcomes.empty()) out.summary = summarize_cohort(outcomes);
  return out;
}

}  // namespace te
