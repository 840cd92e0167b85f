#include "te/core.hpp"

#include <cmath>
#include <numeric>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

std::string_view to_string(Title t) {
  switch (t) {
    case Title::Mr: return "Mr";
    case Title::Ms: return "Ms";
    case Title::Mx: return "Mx";
  }
  return "?";
}

std::string_view to_string(RaceGroup g) {
  switch (g) {
    case RaceGroup::AmericanIndianAlaskaNative: return "AmericanIndianAlaskaNative";
    case RaceGroup::AsianPacificIslander: return "AsianPacificIslander";
    case RaceGroup::BlackAfricanAmerican: return "BlackAfricanAmerican";
    case RaceGroup::HispanicLatino: return "HispanicLatino";
    case RaceGroup::White: return "White";
  }
  return "?";
}

Title parse_title(std::string_view s) {
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  if (s == "Mr") return Title::Mr;
  if (s == "Ms") return Title::Ms;
  if (s == "Mx") return Title::Mx;
  throw Error(ErrorCode::InvalidArgument, "unknown title '" + std::string(s) + "'");
}

RaceGroup parse_race_group(std::string_view s) {
  for (RaceGroup g : kAllRaceGroups) {
    if (to_string(g) == s) return g;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown race group '" + std::string(s) + "'");
}

std::string_view possessive_pronoun(Title t) {
  switch (t) {
    case Title::Mr: return "his";
    case Title::Ms: return "her";
    case Title::Mx: return "their";
  }
  return "their";
}

std::string_view object_pronoun(Title t) {
  switch (t) {
    case Title::Mr: return "him";
    case Title::Ms: return "her";
    case Title::Mx: return "them";
  }
  return "them";
}

std::string_view reflexive_pronoun(Title t) {
  switch (t) {
    case Title::Mr: return "himself";
    case Title::Ms: return "herself";
    case Title::Mx: return "themself";
  }
  return "themself";
}

std::string ParticipantName::display() const {
  std::string out(to_string(title));
  out += ". ";
  out += surname;
  return out;
}

void SamplingParams::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "top_p must be in (0, 1]");
  if (max_tokens <= 0) throw Error(ErrorCode::InvalidArgument, "max_tokens must be positive");
}

std::string_view to_string(SegmentSource s) {
  switch (s) {
    case SegmentSource::Template: return "Template";
    case SegmentSource::ModelGenerated: return "ModelGenerated";
    case SegmentSource::ExperimenterCanned: return "ExperimenterCanned";
    case SegmentSource::ClassifierNote: return "ClassifierNote";
  }
  return "?";
}

SegmentSource parse_segment_source(std::string_view s) {
  for (auto v : {SegmentSource::Template, SegmentSource::ModelGenerated,
                 SegmentSource::ExperimenterCanned, SegmentSource::ClassifierNote}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown segment source '" + std::string(s) + "'");
}

std::string_view to_string(MilgramCause c) {
  switch (c) {
    case MilgramCause::Completed: return "Completed";
    case MilgramCause::Termination: return "Termination";
    case MilgramCause::FiveDisobediences: return "FiveDisobediences";
  }
  return "?";
}

MilgramCause parse_milgram_cause(std::string_view s) {
  for (auto v : {MilgramCause::Completed, MilgramCause::Termination, MilgramCause::FiveDisobediences}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Milgram cause '" + std::string(s) + "'");
}

std::string Record::transcript() const {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.text.size();
  std::string out;
  out.reserve(total);
  for (const auto& s : segments) out += s.text;
  return out;
}

void Record::validate() const {
  for (const auto& s : segments) {
    if (s.text.empty()) throw Error(ErrorCode::InvalidArgument, "record segment text is empty");
  }
  const bool tag_ok = std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, UGDecision>) {
          return experiment_id == experiment::kUltimatum;
        } else if constexpr (std::is_same_v<T, Grammaticality>) {
          return experiment_id == experiment::kGardenPath;
        } else if constexpr (std::is_same_v<T, MilgramOutcome>) {
          return (experiment_id == experiment::kMilgram || experiment_id == experiment::kMilgramNovel) &&
                 o.max_punishments >= 0 && o.max_punishments <= kMaxPunishments;
        } else {
          return experiment_id == experiment::kCrowd;
        }
      },
      outcome);
  if (!tag_ok) {
    throw Error(ErrorCode::InvalidArgument, "outcome does not match experiment '" + experiment_id + "'");
  }
}

void check_normalized(std::span<const double> weights) {
  if (weights.empty()) throw Error(ErrorCode::EmptySet, "no records");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::UnnormalizedWeights, "weight " + format_double(w) + " is not a probability");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::UnnormalizedWeights, "weights sum to " + format_double(sum));
  }
}

WeightedRecordSet::WeightedRecordSet(std::vector<WeightedRecord> entries) : entries_(std::move(entries)) {
  std::vector<double> w;
  w.reserve(entries_.size());
  for (const auto& e : entries_) w.push_back(e.weight);
  check_normalized(w);
}

WeightedRecordSet WeightedRecordSet::single(Record r) {
  std::vector<WeightedRecord> v;
  v.push_back({std::move(r), 1.0});
  return WeightedRecordSet(std::move(v));
}

const Record& sample_record(const WeightedRecordSet& set, std::uint64_t seed) {
  std::vector<double> w;
  for (const auto& e : set.entries()) w.push_back(e.weight);
  check_normalized(w);

  Rng rng(seed);
  const double u = rng.uniform01();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last_positive = i;
    cumulative += w[i];
    if (u < cumulative) return set.entries()[i].record;
  }
  // u landed in the rounding slack above the cumulative sum.
  return set.entries()[last_positive].record;
}

std::vector<double> normalize_weights(std::span<const double> raw) {
  double sum = 0.0;
  for (double w : raw) {
    if (w < 0.0 || std::isnan(w)) throw Error(ErrorCode::NegativeWeight, "weight " + format_double(w));
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::AllZero, "weights sum to zero");
  std::vector<double> out;
  out.reserve(raw.size());
  for (double w : raw) out.push_back(w / sum);
  return out;
}

}  // namespace te
