#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "te/lm_port.hpp"
#include "te/parallel.hpp"
#include "te/run_options.hpp"

namespace te {

enum class QuestionSource { Moussaid2013, Authors };
std::string_view to_string(QuestionSource s);

struct CrowdQuestion {
  std::string id;
  std::string text;
  std::int64_t truth = 0;
  QuestionSource source = QuestionSource::Moussaid2013;
};

/// The ten bundled questions in file order. Throws DataMissing or ChecksumMismatch.
std::vector<CrowdQuestion> load_crowd_questions(const std::optional<std::filesystem::path>& data_dir = std::nullopt);

/// Free-response prompt ending in an open bracket after the answer label.
std::string build_crowd_prompt(const ParticipantName& name, const CrowdQuestion& q);

/// max_tokens 16, stop at newline; temperature and top_p left at 1.
SamplingParams crowd_sampling_params();

/// The span before the first ']' with commas and spaces removed, if it is a
/// non-empty run of digits that fits in int64; nullopt otherwise.
std::optional<std::int64_t> parse_estimate(std::string_view completion);

/// Inverse of parse_estimate: "1064]" for a value, "invalid" for nullopt.
std::string render_estimate(std::optional<std::int64_t> estimate);

struct CrowdCell {
  ParticipantName name;
  std::string question_id;
  std::optional<std::int64_t> estimate;
  std::string completion;
};

/// names x questions grid, ordered by name then question.
BatchResult<CrowdCell> run_crowd(const std::vector<ParticipantName>& names, const std::vector<CrowdQuestion>& questions,
                                 const Backend& backend, const RunOptions& opts = {});

/// Fraction of cells holding a valid estimate.
double crowd_validity_rate(const std::vector<CrowdCell>& cells);

struct CrowdSummary {
  std::string question_id;
  std::int64_t truth = 0;
  std::size_t n_total = 0;
  std::size_t n_valid = 0;
  double median = 0.0;
  double iqr = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double normalized_median = 0.0;
  bool hyper_accurate = false;  // iqr == 0 and median == truth
};

/// Per-question statistics over valid estimates, in question order. Throws
/// NoValidEstimates when a question has none.
std::vector<CrowdSummary> analyze_crowd(const std::vector<CrowdCell>& cells, const std::vector<CrowdQuestion>& questions);

/// analyze_crowd restricted to each title present; questions without valid
/// estimates for a title are omitted from that title's list.
std::map<Title, std::vector<CrowdSummary>> analyze_crowd_by_title(const std::vector<CrowdCell>& cells,
                                                                  const std::vector<CrowdQuestion>& questions);

}  // namespace te
