#include "te/policies.hpp"

#include <algorithm>
#include <cmath>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te::policy {

namespace {

// Text strictly between the first `open` and the following `close`.
std::optional<std::string> between(const std::string& s, std::string_view open, std::string_view close,
                                   std::size_t from = 0) {
  const auto a = s.find(open, from);
  if (a == std::string::npos) return std::nullopt;
  const auto b = s.find(close, a + open.size());
  if (b == std::string::npos) return std::nullopt;
  return s.substr(a + open.size(), b - a - open.size());
}

Title title_of(const std::string& display) {
  const auto dot = display.find('.');
  return parse_title(dot == std::string::npos ? display : display.substr(0, dot));
}

std::vector<PolicyOption> two_way(std::string first, std::string second, double p_first, double validity) {
  return {{std::move(first), validity * p_first}, {std::move(second), validity * (1.0 - p_first)}};
}

double unit_hash(std::string_view s) {
  return static_cast<double>(splitmix64(fnv1a(s)) >> 11) * 0x1.0p-53;
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

std::map<std::string, std::size_t> name_index(const std::vector<ParticipantName>& names) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < names.size(); ++i) idx.emplace(names[i].display(), i);
  return idx;
}

struct CrowdLookup {
  std::map<std::string, const CrowdQuestion*> by_text;
  std::map<std::string, std::size_t> names;
};

// (question, subject index) for a crowd prompt.
std::optional<std::pair<const CrowdQuestion*, std::size_t>> crowd_fields(const CrowdLookup& lk,
                                                                         const std::string& prompt) {
  const auto text = between(prompt, "Question (text): [", "]\n\n");
  const auto name_end = prompt.find(" was asked");
  if (!text || name_end == std::string::npos) return std::nullopt;
  const auto q = lk.by_text.find(*text);
  const auto n = lk.names.find(prompt.substr(0, name_end));
  if (q == lk.by_text.end() || n == lk.names.end()) return std::nullopt;
  return std::pair{q->second, n->second};
}

}  // namespace

std::optional<UGPromptFields> parse_ug_prompt(const std::string& prompt) {
  const auto responder = between(prompt, "In the following scenario, ", " had to decide");
  const auto proposer = between(prompt, "Scenario: ", " is given $");
  if (!responder || !proposer) return std::nullopt;
  const auto offer = between(prompt, " and offers " + *responder + " $", ".\n\n");
  if (!offer || offer->empty()) return std::nullopt;
  UGPromptFields f;
  f.proposer = *proposer;
  f.responder = *responder;
  try {
    f.proposer_title = title_of(f.proposer);
    f.responder_title = title_of(f.responder);
    f.offer = std::stoi(*offer);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return f;
}

double UGLogistic::pair_intercept(const std::string& proposer, const std::string& responder) const {
  return intercept_spread * (2.0 * unit_hash(proposer + "|" + responder) - 1.0);
}

double UGLogistic::p_accept(const std::string& proposer, const std::string& responder, int offer) const {
  const double x = slope * (offer - midpoint) + pair_intercept(proposer, responder);
  return 1.0 / (1.0 + std::exp(-x));
}

double UGLogistic::validity_for(Title responder) const {
  const auto it = validity_by_responder.find(responder);
  return it == validity_by_responder.end() ? validity : it->second;
}

PolicyFn ug_logistic(UGLogistic params) {
  return [params](const std::string& prompt) -> std::vector<PolicyOption> {
    const auto f = parse_ug_prompt(prompt);
    if (!f) return {};
    return two_way(" accept the offer.", " reject the offer.", params.p_accept(f->proposer, f->responder, f->offer),
                   params.validity_for(f->responder_title));
  };
}

PolicyFn ug_by_titles(std::map<std::pair<Title, Title>, double> p_accept, double fallback_p, double validity) {
  return [p_accept = std::move(p_accept), fallback_p, validity](const std::string& prompt) -> std::vector<PolicyOption> {
    const auto f = parse_ug_prompt(prompt);
    if (!f) return {};
    const auto it = p_accept.find({f->proposer_title, f->responder_title});
    return two_way(" accept the offer.", " reject the offer.", it == p_accept.end() ? fallback_p : it->second,
                   validity);
  };
}

PolicyFn ug_always_accept() {
  return [](const std::string&) -> std::vector<PolicyOption> { return {{" accept the offer.", 1.0}}; };
}

PolicyFn gp_by_kind(const std::vector<SentenceItem>& items, double p_gp, double p_control, double validity) {
  std::map<std::string, SentenceKind> kinds;
  for (const auto& it : items) kinds[it.text] = it.kind;
  return [kinds = std::move(kinds), p_gp, p_control, validity](const std::string& prompt) -> std::vector<PolicyOption> {
    const auto sentence = between(prompt, "Sentence: ", "\n\nAnswer:");
    if (!sentence) return {};
    const auto it = kinds.find(*sentence);
    if (it == kinds.end()) return {};
    const double p = it->second == SentenceKind::GardenPath ? p_gp : p_control;
    return two_way(" ungrammatical.", " grammatical.", p, validity);
  };
}

PolicyFn crowd_truth(const std::vector<CrowdQuestion>& questions, const std::vector<ParticipantName>& names,
                     double valid_fraction) {
  if (!(valid_fraction >= 0.0 && valid_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "valid_fraction outside [0, 1]");
  }
  auto shared = std::make_shared<std::pair<std::vector<CrowdQuestion>, CrowdLookup>>(questions, CrowdLookup{});
  for (auto& q : shared->first) shared->second.by_text[q.text] = &q;
  shared->second.names = name_index(names);
  return [shared, valid_fraction](const std::string& prompt) -> std::vector<PolicyOption> {
    const auto f = crowd_fields(shared->second, prompt);
    if (!f) return {};
    const auto i = static_cast<double>(f->second);
    const bool valid = std::floor((i + 1.0) * valid_fraction) > std::floor(i * valid_fraction);
    if (!valid) return {{"I am not sure.]", 1.0}};
    return {{std::to_string(f->first->truth) + "]", 1.0}};
  };
}

PolicyFn crowd_table(const std::vector<CrowdQuestion>& questions, const std::vector<ParticipantName>& names,
                     std::map<std::string, std::vector<std::int64_t>> answers) {
  for (const auto& [id, list] : answers) {
    if (list.size() != names.size()) {
      throw Error(ErrorCode::LengthMismatch, "answer table for " + id + " does not match the name list");
    }
  }
  auto shared = std::make_shared<std::pair<std::vector<CrowdQuestion>, CrowdLookup>>(questions, CrowdLookup{});
  for (auto& q : shared->first) shared->second.by_text[q.text] = &q;
  shared->second.names = name_index(names);
  return [shared, answers = std::move(answers)](const std::string& prompt) -> std::vector<PolicyOption> {
    const auto f = crowd_fields(shared->second, prompt);
    if (!f) return {};
    const auto it = answers.find(f->first->id);
    if (it == answers.end()) return {};
    return {{std::to_string(it->second[f->second]) + "]", 1.0}};
  };
}

std::string obedient_text(const ScenarioSpec& s) {
  if (s.id == experiment::kMilgramNovel) return " presses the submerge button and the driver is submerged in water.";
  return " shocks the learner at the current voltage level and moves on to the next question.";
}

PolicyFn milgram_scripted(MilgramScript script) {
  if (!script.scenario) throw Error(ErrorCode::InvalidArgument, "scripted subject needs a scenario");
  const ScenarioSpec& sc = *script.scenario;
  std::string correct_text;
  for (const auto& e : sc.events) {
    if (!e.expects_punishment) {
      correct_text = e.text.substr(e.text.rfind(". ") == std::string::npos ? 0 : e.text.rfind(". ") + 2);
      break;
    }
  }
  const std::string obey = obedient_text(sc);
  return [script = std::move(script), correct_text, obey](const std::string& prompt) -> std::vector<PolicyOption> {
    const ScenarioSpec& s = *script.scenario;
    const double hi = script.confidence;
    if (const auto action = between(prompt, "\n\nAction: ", "\nExperimenter's note: ")) {
      if (prompt.find("did stop or did not stop") != std::string::npos) {
        const bool stop = action->find(std::string(kStopText.substr(1, kStopText.size() - 2))) != std::string::npos;
        return two_way(" " + s.termination.first_choice, " " + s.termination.second_choice, stop ? hi : 1.0 - hi, 1.0);
      }
      const bool punish = action->find(obey.substr(1)) != std::string::npos;
      return two_way(" " + s.punishment.first_choice, " " + s.punishment.second_choice, punish ? hi : 1.0 - hi, 1.0);
    }
    const auto cut = prompt.rfind("\n\n");
    if (cut == std::string::npos) return {};
    const std::string name = prompt.substr(cut + 2);
    const std::string_view before = std::string_view(prompt).substr(0, cut);
    if (before.ends_with(correct_text)) return {{std::string(kAdvanceText), 1.0}};
    const auto it = script.plans.find(name);
    const SubjectPlan& plan = it == script.plans.end() ? script.default_plan : it->second;
    const auto given = count_occurrences(before, "\n\n" + name + obey);
    if (static_cast<int>(given) < plan.limit) return {{obey, 1.0}};
    return {{std::string(plan.style == BreakStyle::Stop ? kStopText : kRefuseText), 1.0}};
  };
}

std::map<std::string, SubjectPlan> plans_for_histogram(const std::vector<ParticipantName>& names,
                                                       const std::map<int, int>& counts,
                                                       const std::vector<int>& disobey_levels) {
  std::map<std::string, SubjectPlan> plans;
  std::size_t i = 0;
  for (const auto& [level, count] : counts) {
    if (level < 0 || level > kMaxPunishments) {
      throw Error(ErrorCode::LevelOutOfRange, "break-off level " + std::to_string(level));
    }
    const bool disobey = std::find(disobey_levels.begin(), disobey_levels.end(), level) != disobey_levels.end();
    for (int k = 0; k < count; ++k, ++i) {
      if (i >= names.size()) throw Error(ErrorCode::LengthMismatch, "histogram holds more subjects than names");
      plans[names[i].display()] = {level, disobey ? BreakStyle::Disobey : BreakStyle::Stop};
    }
  }
  if (i != names.size()) throw Error(ErrorCode::LengthMismatch, "histogram holds fewer subjects than names");
  return plans;
}

std::shared_ptr<PolicyBackend> make_backend(std::string id, PolicyFn fn) {
  return std::make_shared<PolicyBackend>(std::move(id), std::move(fn));
}

}  // namespace te::policy
