#include "te/crowd.hpp"

#include <charconv>
#include <set>

#include "te/data.hpp"
#include "te/error.hpp"
#include "te/stats.hpp"
#include "te/util.hpp"

namespace te {

std::string_view to_string(QuestionSource s) { return s == QuestionSource::Moussaid2013 ? "Moussaid2013" : "Authors"; }

std::vector<CrowdQuestion> load_crowd_questions(const std::optional<std::filesystem::path>& data_dir) {
  const auto rows = data::parse_tsv(data::read("crowd_questions.tsv", data_dir), {"id", "source", "truth", "question"});
  std::vector<CrowdQuestion> out;
  for (const auto& row : rows) {
    CrowdQuestion q;
    q.id = row[0];
    if (row[1] == "Moussaid2013") {
      q.source = QuestionSource::Moussaid2013;
    } else if (row[1] == "Authors") {
      q.source = QuestionSource::Authors;
    } else {
      throw Error(ErrorCode::DataMissing, "unknown question source " + row[1]);
    }
    const auto truth = parse_estimate(row[2] + "]");
    if (!truth) throw Error(ErrorCode::DataMissing, "bad truth value " + row[2]);
    q.truth = *truth;
    q.text = row[3];
    out.push_back(std::move(q));
  }
  if (out.size() != 10) throw Error(ErrorCode::DataMissing, "crowd_questions.tsv should hold 10 questions");
  return out;
}

std::string build_crowd_prompt(const ParticipantName& name, const CrowdQuestion& q) {
  const std::string n = name.display();
  return n +
         " was asked the following question. They were not allowed to consult any external sources and were "
         "instructed to make their best guess if they were unsure. Their answer was written as an integer using "
         "digits 0-9.\n\nQuestion (text): [" +
         q.text + "]\n\n" + n + "'s answer (integer): [";
}

SamplingParams crowd_sampling_params() {
  SamplingParams p;
  p.max_tokens = 16;
  p.stop_sequences = {"\n"};
  return p;
}

std::optional<std::int64_t> parse_estimate(std::string_view completion) {
  const auto close = completion.find(']');
  if (close == std::string_view::npos) return std::nullopt;
  std::string digits;
  for (char c : completion.substr(0, close)) {
    if (c == ',' || c == ' ') continue;
    if (c < '0' || c > '9') return std::nullopt;
    digits.push_back(c);
  }
  if (digits.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

std::string render_estimate(std::optional<std::int64_t> estimate) {
  return estimate ? std::to_string(*estimate) + "]" : "invalid";
}

BatchResult<CrowdCell> run_crowd(const std::vector<ParticipantName>& names, const std::vector<CrowdQuestion>& questions,
                                 const Backend& backend, const RunOptions& opts) {
  if (names.empty() || questions.empty()) throw Error(ErrorCode::EmptySet, "crowd run needs names and questions");
  const SamplingParams params = crowd_sampling_params();
  return fan_out<CrowdCell>(names.size() * questions.size(), opts.fan_out, [&](std::size_t i) {
    const auto& name = names[i / questions.size()];
    const auto& q = questions[i % questions.size()];
    const auto c = backend.complete(build_crowd_prompt(name, q), params, derive_seed(opts.seed, i));
    return CrowdCell{name, q.id, parse_estimate(c.text), c.text};
  });
}

double crowd_validity_rate(const std::vector<CrowdCell>& cells) {
  if (cells.empty()) throw Error(ErrorCode::Empty, "no crowd cells");
  std::size_t valid = 0;
  for (const auto& c : cells) valid += c.estimate.has_value();
  return static_cast<double>(valid) / static_cast<double>(cells.size());
}

namespace {

std::optional<CrowdSummary> summarize_question(const std::vector<const CrowdCell*>& cells, const CrowdQuestion& q) {
  CrowdSummary s;
  s.question_id = q.id;
  s.truth = q.truth;
  std::vector<double> values;
  for (const auto* c : cells) {
    if (c->question_id != q.id) continue;
    ++s.n_total;
    if (c->estimate) values.push_back(static_cast<double>(*c->estimate));
  }
  s.n_valid = values.size();
  if (values.empty()) return std::nullopt;
  const auto mi = stats::median_iqr(values);
  s.median = mi.median;
  s.iqr = mi.iqr;
  s.q1 = mi.q1;
  s.q3 = mi.q3;
  s.normalized_median = s.median / static_cast<double>(q.truth);
  s.hyper_accurate = s.iqr == 0.0 && s.median == static_cast<double>(q.truth);
  return s;
}

}  // namespace

std::vector<CrowdSummary> analyze_crowd(const std::vector<CrowdCell>& cells, const std::vector<CrowdQuestion>& questions) {
  std::vector<const CrowdCell*> all;
  for (const auto& c : cells) all.push_back(&c);
  std::vector<CrowdSummary> out;
  for (const auto& q : questions) {
    auto s = summarize_question(all, q);
    if (!s) throw Error(ErrorCode::NoValidEstimates, "no valid estimates for question " + q.id);
    out.push_back(*s);
  }
  return out;
}

std::map<Title, std::vector<CrowdSummary>> analyze_crowd_by_title(const std::vector<CrowdCell>& cells,
                                                                  const std::vector<CrowdQuestion>& questions) {
  std::map<Title, std::vector<const CrowdCell*>> by_title;
  for (const auto& c : cells) by_title[c.name.title].push_back(&c);
  std::map<Title, std::vector<CrowdSummary>> out;
  for (const auto& [t, subset] : by_title) {
    auto& list = out[t];
    for (const auto& q : questions) {
      if (auto s = summarize_question(subset, q)) list.push_back(*s);
    }
  }
  return out;
}

}  // namespace te
