#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "te/choice_eval.hpp"
#include "te/parallel.hpp"
#include "te/run_options.hpp"

namespace te {

enum class SentenceKind { GardenPath, Control };
enum class VerbClass { OT, RAT };
enum class SentenceDataset { Christianson2001, Authors };

std::string_view to_string(SentenceKind k);
std::string_view to_string(VerbClass v);
std::string_view to_string(SentenceDataset d);
SentenceDataset parse_sentence_dataset(std::string_view s);

struct SentenceItem {
  std::string id;  // e.g. "christianson2001_03_gp"
  std::string text;
  SentenceKind kind = SentenceKind::GardenPath;
  VerbClass verb_class = VerbClass::OT;
  SentenceDataset dataset = SentenceDataset::Christianson2001;
  int pair = 0;  // 1..24, shared by a garden-path item and its control
};

/// 48 items (24 garden-path/control pairs) in file order, each garden-path
/// item followed by its control. Throws DataMissing or ChecksumMismatch.
std::vector<SentenceItem> load_sentences(SentenceDataset dataset,
                                         const std::optional<std::filesystem::path>& data_dir = std::nullopt);

ChoiceQuery build_gp_prompt(const ParticipantName& name, const SentenceItem& item);

struct GPResult {
  ParticipantName name;
  SentenceItem item;
  double p_ungrammatical = 0.0;
  double validity_rate = 0.0;
};

/// Full names x items grid, ordered by name then item.
BatchResult<GPResult> run_gp(const std::vector<ParticipantName>& names, const std::vector<SentenceItem>& items,
                             const Backend& backend, const RunOptions& opts = {});

struct GPCell {
  SentenceKind kind;
  VerbClass verb_class;
  double mean = 0.0;
  double sem = 0.0;  // over per-sentence means; NaN for a single sentence
  std::size_t n_sentences = 0;
};

struct GPPairPoint {
  SentenceDataset dataset;
  int pair = 0;
  VerbClass verb_class;
  double gp_mean = 0.0;
  double control_mean = 0.0;
  bool violating = false;  // gp_mean <= control_mean
};

struct GPAnalysis {
  std::vector<GPCell> cells;  // (GP, OT), (GP, RAT), (Control, OT), (Control, RAT)
  std::vector<GPPairPoint> pairs;
  std::size_t violating_pairs = 0;

  const GPCell& cell(SentenceKind k, VerbClass v) const;
};

/// Averages over names per sentence first, then over sentences per cell.
/// Throws IncompleteGrid unless results cover a full names x items grid.
GPAnalysis analyze_gp(const std::vector<GPResult>& results);

}  // namespace te
