#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace te {

enum class Title { Mr, Ms, Mx };

enum class RaceGroup {
  AmericanIndianAlaskaNative,
  AsianPacificIslander,
  BlackAfricanAmerican,
  HispanicLatino,
  White,
};

inline constexpr RaceGroup kAllRaceGroups[] = {
    RaceGroup::AmericanIndianAlaskaNative, RaceGroup::AsianPacificIslander,
    RaceGroup::BlackAfricanAmerican,       RaceGroup::HispanicLatino,
    RaceGroup::White,
};

std::string_view to_string(Title t);          // "Mr"
std::string_view to_string(RaceGroup g);      // "White"
Title parse_title(std::string_view s);        // accepts "Mr" or "Mr."
RaceGroup parse_race_group(std::string_view s);

std::string_view possessive_pronoun(Title t);  // his / her / their
std::string_view object_pronoun(Title t);      // him / her / them
std::string_view reflexive_pronoun(Title t);   // himself / herself / themself

struct ParticipantName {
  Title title = Title::Mr;
  std::string surname;
  RaceGroup race_group = RaceGroup::White;

  /// "Ms. Huang"
  std::string display() const;

  auto operator<=>(const ParticipantName&) const = default;
};

/// Generation settings. Defaults are the unmodified sampling distribution
/// (temperature 1, top_p 1).
struct SamplingParams {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 16;
  std::vector<std::string> stop_sequences;

  void validate() const;
  bool operator==(const SamplingParams&) const = default;
};

enum class SegmentSource { Template, ModelGenerated, ExperimenterCanned, ClassifierNote };

std::string_view to_string(SegmentSource s);
SegmentSource parse_segment_source(std::string_view s);

struct RecordSegment {
  SegmentSource source = SegmentSource::Template;
  std::string text;

  bool operator==(const RecordSegment&) const = default;
};

struct UGDecision {
  bool accepted = false;
  bool operator==(const UGDecision&) const = default;
};

struct Grammaticality {
  bool ungrammatical = false;
  bool operator==(const Grammaticality&) const = default;
};

enum class MilgramCause { Completed, Termination, FiveDisobediences };

std::string_view to_string(MilgramCause c);
MilgramCause parse_milgram_cause(std::string_view s);

struct MilgramOutcome {
  int max_punishments = 0;
  bool terminated_early = false;
  MilgramCause cause = MilgramCause::Completed;
  bool operator==(const MilgramOutcome&) const = default;
};

struct CrowdEstimate {
  std::optional<std::int64_t> value;  // nullopt: invalid answer
  bool operator==(const CrowdEstimate&) const = default;
};

using Outcome = std::variant<UGDecision, Grammaticality, MilgramOutcome, CrowdEstimate>;

namespace experiment {
inline constexpr std::string_view kUltimatum = "ultimatum";
inline constexpr std::string_view kGardenPath = "gardenpath";
inline constexpr std::string_view kMilgram = "milgram";
inline constexpr std::string_view kMilgramNovel = "milgram_novel";
inline constexpr std::string_view kCrowd = "crowd";
}  // namespace experiment

inline constexpr int kMaxPunishments = 30;

/// Transcript of one simulated run plus its typed outcome.
struct Record {
  std::string experiment_id;
  std::vector<ParticipantName> participants;
  std::vector<RecordSegment> segments;
  Outcome outcome;

  /// Concatenation of all segment texts.
  std::string transcript() const;
  /// Throws InvalidArgument when the outcome tag does not fit the
  /// experiment or a segment is empty.
  void validate() const;

  bool operator==(const Record&) const = default;
};

struct WeightedRecord {
  Record record;
  double weight = 0.0;
};

inline constexpr double kWeightTolerance = 1e-9;

/// Probability distribution over records: weights non-negative, summing to 1.
class WeightedRecordSet {
 public:
  WeightedRecordSet() = default;
  /// Throws EmptySet / UnnormalizedWeights.
  explicit WeightedRecordSet(std::vector<WeightedRecord> entries);

  static WeightedRecordSet single(Record r);

  const std::vector<WeightedRecord>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<WeightedRecord> entries_;
};

/// Throws EmptySet / UnnormalizedWeights if the weights are not a distribution.
void check_normalized(std::span<const double> weights);

/// Draws one record with probability equal to its weight.
const Record& sample_record(const WeightedRecordSet& set, std::uint64_t seed);

/// Rescales non-negative weights to sum to one. Throws NegativeWeight / AllZero.
std::vector<double> normalize_weights(std::span<const double> raw);

}  // namespace te
