#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "te/choice_eval.hpp"
#include "te/name_pool.hpp"
#include "te/parallel.hpp"
#include "te/run_options.hpp"

namespace te {

inline constexpr int kEndowment = 10;

struct UGCondition {
  ParticipantName proposer;
  ParticipantName responder;
  int offer = 0;

  /// Throws InvalidArgument unless 0 <= offer <= endowment.
  void validate() const;
};

struct UGResult {
  std::size_t pair_index = 0;
  UGCondition condition;
  double p_accept = 0.0;
  double validity_rate = 0.0;
};

std::vector<int> all_offers();

/// Responder decides to accept or reject the proposer's split.
ChoiceQuery build_ug_prompt(const UGCondition& c);

/// One result per (pair, offer), ordered by pair index then offer position.
BatchResult<UGResult> run_ug(const PairingDesign& design, const std::vector<int>& offers, const Backend& backend,
                             const RunOptions& opts = {});

struct OfferCurvePoint {
  int offer = 0;
  double mean = 0.0;
  double sem = 0.0;  // NaN when only one pair contributes
  std::size_t n = 0;
};

/// Mean and SEM of p_accept per offer. Throws MissingOffer if an offer in
/// `offers` has no results.
std::vector<OfferCurvePoint> analyze_offer_curve(const std::vector<UGResult>& results,
                                                 const std::vector<int>& offers = all_offers());

struct ConsistencyMatrix {
  std::vector<int> offers;
  /// r[a][b]: Pearson r over pairs; empty where a column has zero variance.
  std::vector<std::vector<std::optional<double>>> r;
};

/// Throws IncompleteGrid unless every pair has every offer.
ConsistencyMatrix analyze_offer_consistency(const std::vector<UGResult>& results,
                                            const std::vector<int>& offers = all_offers());

/// Title pairing keyed proposer -> responder.
enum class GenderPairing { MrMr, MrMs, MsMr, MsMs };
std::string_view to_string(GenderPairing g);

struct GenderGap {
  int offer = 0;
  std::map<GenderPairing, std::vector<double>> distributions;
  std::map<GenderPairing, double> means;
  /// mean(MsMr) - mean(MrMs): male responders facing female proposers versus
  /// female responders facing male proposers.
  double gap = 0.0;
  /// Two-sided rank-sum p-value, MrMs versus MsMr.
  double p_value = 1.0;
};

/// Throws MissingOffer or EmptyCategory.
GenderGap analyze_gender_gap(const std::vector<UGResult>& results, int offer);

}  // namespace te
