#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "te/error.hpp"
#include "te/milgram.hpp"
#include "te/name_pool.hpp"
#include "te/policies.hpp"
#include "te/util.hpp"

using namespace te;

namespace {

const ParticipantName kSmith{Title::Mr, "Smith", RaceGroup::White};
const ParticipantName kHuang{Title::Ms, "Huang", RaceGroup::AsianPacificIslander};

std::vector<ParticipantName> cohort(std::size_t n) {
  std::vector<ParticipantName> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({i % 2 ? Title::Ms : Title::Mr, "Subject" + std::to_string(i), RaceGroup::White});
  return out;
}

std::shared_ptr<PolicyBackend> scripted(const ScenarioSpec& s, std::map<std::string, policy::SubjectPlan> plans,
                                        policy::SubjectPlan fallback = {}) {
  policy::MilgramScript script;
  script.scenario = &s;
  script.plans = std::move(plans);
  script.default_plan = fallback;
  return policy::make_backend("scripted-milgram", policy::milgram_scripted(script));
}

// Subjects pick among obeying, refusing, stopping and advancing at random;
// classifier prompts are answered from keywords.
PolicyFn random_subject(const ScenarioSpec& s) {
  const std::string obey = policy::obedient_text(s);
  return [&s, obey](const std::string& prompt) -> std::vector<PolicyOption> {
    const auto a = prompt.find("\n\nAction: ");
    if (a != std::string::npos) {
      const std::string action = prompt.substr(a);
      if (prompt.find("did stop or did not stop") != std::string::npos) {
        const double p = action.find("stops the experiment") != std::string::npos ? 0.9 : 0.1;
        return {{" " + s.termination.first_choice, p}, {" " + s.termination.second_choice, 1.0 - p}};
      }
      const double p = action.find(obey.substr(1)) != std::string::npos ? 0.9 : 0.1;
      return {{" " + s.punishment.first_choice, p}, {" " + s.punishment.second_choice, 1.0 - p}};
    }
    return {{obey, 0.8},
            {std::string(policy::kRefuseText), 0.12},
            {std::string(policy::kAdvanceText), 0.06},
            {std::string(policy::kStopText), 0.02}};
  };
}

int punished_count(const MilgramTrace& t, const ScenarioSpec& s) {
  int n = 0;
  for (const auto& ev : t.per_event) {
    const auto& spec = s.events.at(static_cast<std::size_t>(ev.event_index - 1));
    if (!spec.expects_punishment) continue;
    for (const auto& a : ev.attempts) n += a.punished;
  }
  return n;
}

void check_trace_invariants(const MilgramTrace& t, const ScenarioSpec& s, const ParticipantName& name) {
  const auto& out = std::get<MilgramOutcome>(t.record.outcome);
  const std::string subject = name.display();

  // Prods within a stage run 1..4 in order, with the special prod first where it applies.
  int prev_level = 0;
  for (const auto& ev : t.per_event) {
    const auto& spec = s.events.at(static_cast<std::size_t>(ev.event_index - 1));
    CHECK(spec.punishment_level >= prev_level);
    prev_level = spec.punishment_level;
    std::size_t k = 0;
    for (const auto& a : ev.attempts) {
      if (!a.prod_issued) continue;
      const std::string& expected =
          k == 0 && spec.special_prod ? s.special_prod : s.prods.at(k);
      CHECK(*a.prod_issued == fill_template(expected, name));
      ++k;
    }
    CHECK(k <= static_cast<std::size_t>(kProdsPerStage));
    CHECK(ev.attempts.size() <= static_cast<std::size_t>(kProdsPerStage + 1));
  }

  CHECK(out.max_punishments == punished_count(t, s));
  CHECK(out.max_punishments >= 0);
  CHECK(out.max_punishments <= kMaxPunishments);
  if (!out.terminated_early) CHECK(out.max_punishments == kMaxPunishments);

  std::string transcript;
  std::string last_generated;
  std::size_t last_gen_index = 0;
  for (std::size_t i = 0; i < t.record.segments.size(); ++i) {
    const auto& seg = t.record.segments[i];
    if (seg.source == SegmentSource::ModelGenerated) {
      REQUIRE(i > 0);
      CHECK(t.record.segments[i - 1].text.ends_with("\n\n" + subject));
      last_generated = seg.text;
      last_gen_index = i;
    }
    transcript += seg.text;
  }
  std::string tail;
  for (std::size_t i = last_gen_index + 1; i < t.record.segments.size(); ++i) tail += t.record.segments[i].text;
  CHECK((tail.empty() || tail == "\n\n" + s.end_text));
  CHECK(transcript == t.last_prompt + last_generated + tail);
  CHECK_NOTHROW(t.record.validate());
}

}  // namespace

TEST_CASE("scenarios hold 36 events, 30 punishing, and validate") {
  for (const auto* s : {&classic_scenario(), &novel_scenario()}) {
    CHECK_NOTHROW(s->validate());
    CHECK(s->events.size() == 36u);
    int punishing = 0;
    for (const auto& e : s->events) punishing += e.expects_punishment;
    CHECK(punishing == 30);
  }
  CHECK(&scenario_by_id("milgram") == &classic_scenario());
  CHECK(&scenario_by_id("milgram_novel") == &novel_scenario());
  CHECK_THROWS_WITH(scenario_by_id("asch"), doctest::Contains("ConfigError"));
}

TEST_CASE("a broken schedule fails validation") {
  ScenarioSpec s = classic_scenario();
  s.events.pop_back();
  CHECK_THROWS_WITH(s.validate(), doctest::Contains("InvalidArgument"));
  s = classic_scenario();
  s.events[5].punishment_level = 9;
  CHECK_THROWS(s.validate());
}

TEST_CASE("level designations") {
  CHECK(level_designation(1) == "slight shock");
  CHECK(level_designation(4) == "slight shock");
  CHECK(level_designation(5) == "moderate shock");
  CHECK(level_designation(20) == "intense shock");
  CHECK(level_designation(29) == "XXX shock");
  CHECK(level_designation(30) == "XXX shock");
  CHECK_THROWS_WITH(level_designation(0), doctest::Contains("LevelOutOfRange"));
  CHECK_THROWS_WITH(level_designation(31), doctest::Contains("LevelOutOfRange"));
}

TEST_CASE("stage text names the voltage and the subject") {
  const auto& e = classic_scenario().events.front();
  CHECK(e.punishment_level == 1);
  CHECK(fill_template(e.text, kSmith).find("slight shock, 15 volts. The experimenter is sitting next to Mr. Smith.") !=
        std::string::npos);
}

TEST_CASE("first sentence extraction") {
  CHECK(extract_first_sentence(" stops the experiment. Then leaves.") == " stops the experiment.");
  CHECK(extract_first_sentence(" says \"wait!\" loudly") == " says \"wait!\" loudly");
  CHECK(extract_first_sentence(" asks why? And waits.") == " asks why?");
  CHECK(extract_first_sentence(" reads 4.5 volts. Next.") == " reads 4.5 volts.");
  CHECK(extract_first_sentence(" no terminator") == " no terminator");
  CHECK(extract_first_sentence(" ends here.") == " ends here.");
}

TEST_CASE("classifier prompt and decisions") {
  const auto& s = classic_scenario();
  const auto q = build_classifier_query(s.termination, kHuang, " stops the experiment.");
  CHECK(q.prompt.ends_with("Action: Ms. Huang stops the experiment.\nExperimenter's note: Ms. Huang did"));
  CHECK(q.choices == std::vector<std::string>{"stop", "not stop"});
  CHECK_THROWS_WITH(build_classifier_query(s.termination, kHuang, "  "), doctest::Contains("InvalidArgument"));

  const auto stop = policy::make_backend("c", [](const std::string&) -> std::vector<PolicyOption> {
    return {{" stop", 0.99}, {" not stop", 0.01}};
  });
  const auto r = classify(s.termination, kHuang, " stops the experiment.", *stop);
  CHECK(r.p_first == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(r.validity_rate == doctest::Approx(1.0).epsilon(1e-12));

  const auto shock = policy::make_backend("c", [](const std::string&) -> std::vector<PolicyOption> {
    return {{" shock", 1.0}};
  });
  CHECK(classify(s.punishment, kHuang, " shocks the learner.", *shock).p_first == doctest::Approx(1.0));

  ClassifierSpec same{"Action: $subject$action\nNote:", "x", "x"};
  CHECK_THROWS_WITH(build_classifier_query(same, kHuang, " acts."), doctest::Contains("AmbiguousChoices"));
}

TEST_CASE("an obedient subject administers all 30 punishments") {
  const auto& s = classic_scenario();
  const auto backend = scripted(s, {});
  const auto t = run_subject(kSmith, s, *backend, 7);
  const auto& out = std::get<MilgramOutcome>(t.record.outcome);
  CHECK(out.max_punishments == 30);
  CHECK_FALSE(out.terminated_early);
  CHECK(out.cause == MilgramCause::Completed);
  CHECK(t.per_event.size() == 36u);
  check_trace_invariants(t, s, kSmith);
}

TEST_CASE("a subject who stops after 20 punishments ends by termination") {
  const auto& s = classic_scenario();
  const auto backend = scripted(s, {{kSmith.display(), {20, policy::BreakStyle::Stop}}});
  const auto t = run_subject(kSmith, s, *backend, 7);
  const auto& out = std::get<MilgramOutcome>(t.record.outcome);
  CHECK(out.max_punishments == 20);
  CHECK(out.terminated_early);
  CHECK(out.cause == MilgramCause::Termination);
  CHECK(t.per_event.back().attempts.back().p_stop > 0.5);
  check_trace_invariants(t, s, kSmith);
}

TEST_CASE("five disobediences at one stage end the experiment") {
  for (const auto* s : {&classic_scenario(), &novel_scenario()}) {
    const auto backend = scripted(*s, {{kHuang.display(), {19, policy::BreakStyle::Disobey}}});
    const auto t = run_subject(kHuang, *s, *backend, 3);
    const auto& out = std::get<MilgramOutcome>(t.record.outcome);
    CHECK(out.max_punishments == 19);
    CHECK(out.cause == MilgramCause::FiveDisobediences);
    const auto& last = t.per_event.back();
    CHECK(last.attempts.size() == 5u);
    CHECK(t.record.segments.back().source == SegmentSource::ExperimenterCanned);
    CHECK(t.record.segments.back().text == "\n\nThe experimenter ends the experiment.");
    check_trace_invariants(t, *s, kHuang);
  }
}

TEST_CASE("the procedure reminder is issued once when a correct answer is punished") {
  const auto& s = classic_scenario();
  const std::string obey = policy::obedient_text(s);
  // Always answers with the punishing action, even after correct answers.
  const auto backend = policy::make_backend("eager", [&s, obey](const std::string& prompt) -> std::vector<PolicyOption> {
    if (prompt.find("\n\nAction: ") != std::string::npos) {
      if (prompt.find("did stop or did not stop") != std::string::npos) return {{" stop", 0.01}, {" not stop", 0.99}};
      return {{" shock", 0.99}, {" not shock", 0.01}};
    }
    return {{obey, 1.0}};
  });
  const auto t = run_subject(kSmith, s, *backend, 1);
  int reminders = 0;
  for (const auto& ev : t.per_event) {
    const auto& spec = s.events.at(static_cast<std::size_t>(ev.event_index - 1));
    for (const auto& a : ev.attempts) {
      reminders += a.reminder_issued;
      if (a.reminder_issued) CHECK_FALSE(spec.expects_punishment);
    }
  }
  CHECK(reminders == 6);
  CHECK(std::get<MilgramOutcome>(t.record.outcome).max_punishments == 30);
  check_trace_invariants(t, s, kSmith);
}

TEST_CASE("property: trace invariants hold for randomly behaving subjects") {
  for (const auto* s : {&classic_scenario(), &novel_scenario()}) {
    const auto backend = policy::make_backend("random", random_subject(*s));
    const auto names = cohort(40);
    std::set<int> levels;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto t = run_subject(names[i], *s, *backend, derive_seed(99, i));
      levels.insert(std::get<MilgramOutcome>(t.record.outcome).max_punishments);
      check_trace_invariants(t, *s, names[i]);
      const auto again = run_subject(names[i], *s, *backend, derive_seed(99, i));
      CHECK(to_json(again) == to_json(t));
    }
    CHECK(levels.size() > 3u);
  }
}

TEST_CASE("blank generations are re-drawn, then rejected") {
  const auto& s = classic_scenario();
  const auto blank = policy::make_backend("blank", [](const std::string& prompt) -> std::vector<PolicyOption> {
    if (prompt.find("\n\nAction: ") != std::string::npos) return {{" stop", 0.5}, {" not stop", 0.5}};
    return {{"   ", 1.0}};
  });
  CHECK_THROWS_WITH(run_subject(kSmith, s, *blank, 1), doctest::Contains("MalformedResponse"));
}

TEST_CASE("an all-obedient cohort is 100% obedient") {
  const auto& s = classic_scenario();
  const auto names = cohort(12);
  const auto backend = scripted(s, {});
  RunOptions opts;
  opts.fan_out.concurrency = 4;
  const auto r = run_cohort(names, s, *backend, opts);
  CHECK(r.traces.complete());
  CHECK(r.summary.percent_obedient == doctest::Approx(100.0));
  CHECK(r.summary.break_off[30] == 12);
  REQUIRE(r.summary.rows().size() == 1u);
  CHECK(r.summary.rows()[0].designation == "XXX shock");
}

TEST_CASE("a scripted cohort reproduces a break-off histogram and its survival curve") {
  const auto& s = classic_scenario();
  const std::map<int, int> hist{{0, 1}, {19, 1}, {20, 18}, {22, 2}, {27, 1}, {28, 2}, {30, 75}};
  const auto names = milgram_subjects(load_surnames());
  REQUIRE(names.size() == 100u);
  policy::MilgramScript script;
  script.scenario = &s;
  script.plans = policy::plans_for_histogram(names, hist, {19, 27});
  const auto backend = policy::make_backend("fixture", policy::milgram_scripted(script));
  RunOptions opts;
  opts.fan_out.concurrency = 4;
  opts.seed = 5;
  const auto r = run_cohort(names, s, *backend, opts);
  REQUIRE(r.traces.complete());
  CHECK(r.summary.percent_obedient == doctest::Approx(75.0));
  for (const auto& [level, count] : hist) CHECK(r.summary.break_off[static_cast<std::size_t>(level)] == count);

  std::map<MilgramCause, int> causes;
  for (const auto& t : r.traces.values()) {
    const auto& o = std::get<MilgramOutcome>(t.record.outcome);
    ++causes[o.cause];
    if (o.max_punishments == 19 || o.max_punishments == 27) CHECK(o.cause == MilgramCause::FiveDisobediences);
  }
  CHECK(causes[MilgramCause::Completed] == 75);
  CHECK(causes[MilgramCause::FiveDisobediences] == 2);
  CHECK(causes[MilgramCause::Termination] == 23);

  // Oracle: fraction of subjects obedient or past level L.
  REQUIRE(r.summary.survival.size() == 31u);
  for (int level = 0; level <= 30; ++level) {
    int past = 0;
    for (const auto& [l, c] : hist) past += (l == 30 || l > level) ? c : 0;
    CHECK(r.summary.survival[static_cast<std::size_t>(level)] == doctest::Approx(past / 100.0));
  }
}

TEST_CASE("a 40-subject human-style histogram summarizes to 65% obedient") {
  const std::map<int, int> hist{{20, 5}, {21, 4}, {22, 2}, {23, 1}, {24, 1}, {25, 1}, {30, 26}};
  std::vector<MilgramOutcome> outcomes;
  for (const auto& [level, count] : hist) {
    for (int k = 0; k < count; ++k) {
      outcomes.push_back({level, level != 30, level == 30 ? MilgramCause::Completed : MilgramCause::Termination});
    }
  }
  const auto sum = summarize_cohort(outcomes);
  CHECK(sum.n == 40u);
  CHECK(sum.percent_obedient == doctest::Approx(65.0));
  CHECK(sum.rows().size() == 7u);
  CHECK(sum.rows().front().designation == "intense shock");
  CHECK(sum.survival[0] == doctest::Approx(1.0));
  CHECK(sum.survival[20] == doctest::Approx(35.0 / 40.0));
  CHECK(sum.survival[30] == doctest::Approx(0.65));
}

TEST_CASE("summaries reject out-of-range levels and empty cohorts") {
  CHECK_THROWS_WITH(summarize_cohort({}), doctest::Contains("Empty"));
  CHECK_THROWS_WITH(summarize_cohort({{31, false, MilgramCause::Completed}}), doctest::Contains("LevelOutOfRange"));
  CHECK_THROWS_WITH(policy::plans_for_histogram(cohort(2), {{31, 2}}), doctest::Contains("LevelOutOfRange"));
  CHECK_THROWS_WITH(policy::plans_for_histogram(cohort(3), {{30, 2}}), doctest::Contains("LengthMismatch"));
}

TEST_CASE("trace json carries every attempt") {
  const auto& s = classic_scenario();
  const auto backend = scripted(s, {{kSmith.display(), {2, policy::BreakStyle::Stop}}});
  const auto t = run_subject(kSmith, s, *backend, 1);
  const auto j = to_json(t);
  CHECK(j.at("per_event").size() == t.per_event.size());
  CHECK(j.at("record").at("experiment_id") == "milgram");
}
