#include "te/ultimatum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "te/error.hpp"
#include "te/stats.hpp"
#include "te/util.hpp"

namespace te {

void UGCondition::validate() const {
  if (offer < 0 || offer > kEndowment) {
    throw Error(ErrorCode::InvalidArgument, "offer " + std::to_string(offer) + " outside 0.." +
                                                std::to_string(kEndowment));
  }
}

std::vector<int> all_offers() {
  std::vector<int> v(kEndowment + 1);
  for (int i = 0; i <= kEndowment; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

ChoiceQuery build_ug_prompt(const UGCondition& c) {
  c.validate();
  const std::string p = c.proposer.display();
  const std::string r = c.responder.display();
  const std::string keep = std::to_string(kEndowment - c.offer);
  const std::string offer = std::to_string(c.offer);
  std::string s;
  s += "In the following scenario, " + r + " had to decide whether to accept or reject the proposal.\n\n";
  s += "Scenario: " + p + " is given $" + std::to_string(kEndowment) + ". " + p +
       " will propose how to split the money between " + std::string(reflexive_pronoun(c.proposer.title)) +
       " and " + r + ". Then " + r + " will decide whether to accept or reject " + p + "'s proposal. If " + r +
       " accepts, then " + p + " and " + r + " get the money as they agreed to split. If " + r + " rejects, then " +
       p + " and " + r + " both receive nothing. " + p + " takes $" + keep + " for " +
       std::string(reflexive_pronoun(c.proposer.title)) + " and offers " + r + " $" + offer + ".\n\n";
  s += "Answer: " + r + " decides to";
  return {std::move(s), {"accept", "reject"}};
}

BatchResult<UGResult> run_ug(const PairingDesign& design, const std::vector<int>& offers, const Backend& backend,
                             const RunOptions& opts) {
  for (int o : offers) UGCondition{{}, {}, o}.validate();
  const std::size_t n = design.pairs.size() * offers.size();
  return fan_out<UGResult>(n, opts.fan_out, [&](std::size_t i) {
    const std::size_t pair = i / offers.size();
    const UGCondition cond{design.pairs[pair].proposer, design.pairs[pair].responder, offers[i % offers.size()]};
    const auto outcome = evaluate(build_ug_prompt(cond), backend, opts.choice, derive_seed(opts.seed, i));
    return UGResult{pair, cond, outcome.probabilities[0], outcome.validity_rate};
  });
}

std::vector<OfferCurvePoint> analyze_offer_curve(const std::vector<UGResult>& results, const std::vector<int>& offers) {
  std::vector<OfferCurvePoint> curve;
  for (int o : offers) {
    std::vector<double> xs;
    for (const auto& r : results) {
      if (r.condition.offer == o) xs.push_back(r.p_accept);
    }
    if (xs.empty()) throw Error(ErrorCode::MissingOffer, "no results for offer " + std::to_string(o));
    const auto s = stats::summarize(xs);
    curve.push_back({o, s.mean, s.sem, s.n});
  }
  return curve;
}

ConsistencyMatrix analyze_offer_consistency(const std::vector<UGResult>& results, const std::vector<int>& offers) {
  std::map<std::size_t, std::map<int, double>> by_pair;
  for (const auto& r : results) by_pair[r.pair_index][r.condition.offer] = r.p_accept;
  if (by_pair.empty()) throw Error(ErrorCode::IncompleteGrid, "no results");

  std::vector<std::vector<double>> columns(offers.size());
  for (const auto& [pair, row] : by_pair) {
    for (std::size_t k = 0; k < offers.size(); ++k) {
      auto it = row.find(offers[k]);
      if (it == row.end()) {
        throw Error(ErrorCode::IncompleteGrid,
                    "pair " + std::to_string(pair) + " lacks offer " + std::to_string(offers[k]));
      }
      columns[k].push_back(it->second);
    }
  }

  ConsistencyMatrix m;
  m.offers = offers;
  m.r.assign(offers.size(), std::vector<std::optional<double>>(offers.size()));
  for (std::size_t a = 0; a < offers.size(); ++a) {
    for (std::size_t b = a; b < offers.size(); ++b) {
      std::optional<double> r;
      try {
        // The diagonal is 1 whenever the column is non-constant.
        const double v = stats::pearson(columns[a], columns[b]);
        r = a == b ? 1.0 : v;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateVariance && e.code() != ErrorCode::InvalidArgument) throw;
      }
      m.r[a][b] = r;
      m.r[b][a] = r;
    }
  }
  return m;
}

std::string_view to_string(GenderPairing g) {
  switch (g) {
    case GenderPairing::MrMr: return "MrMr";
    case GenderPairing::MrMs: return "MrMs";
    case GenderPairing::MsMr: return "MsMr";
    case GenderPairing::MsMs: return "MsMs";
  }
  return "?";
}

namespace {

std::optional<GenderPairing> pairing_of(const UGCondition& c) {
  const bool pm = c.proposer.title == Title::Mr;
  const bool rm = c.responder.title == Title::Mr;
  if (c.proposer.title == Title::Mx || c.responder.title == Title::Mx) return std::nullopt;
  if (pm) return rm ? GenderPairing::MrMr : GenderPairing::MrMs;
  return rm ? GenderPairing::MsMr : GenderPairing::MsMs;
}

}  // namespace

GenderGap analyze_gender_gap(const std::vector<UGResult>& results, int offer) {
  GenderGap g;
  g.offer = offer;
  bool any = false;
  for (const auto& r : results) {
    if (r.condition.offer != offer) continue;
    any = true;
    if (auto k = pairing_of(r.condition)) g.distributions[*k].push_back(r.p_accept);
  }
  if (!any) throw Error(ErrorCode::MissingOffer, "no results for offer " + std::to_string(offer));
  for (GenderPairing k : {GenderPairing::MrMr, GenderPairing::MrMs, GenderPairing::MsMr, GenderPairing::MsMs}) {
    auto it = g.distributions.find(k);
    if (it == g.distributions.end() || it->second.empty()) {
      throw Error(ErrorCode::EmptyCategory, "no results for pairing " + std::string(to_string(k)));
    }
    g.means[k] = stats::mean(it->second);
  }
  g.gap = g.means[GenderPairing::MsMr] - g.means[GenderPairing::MrMs];
  g.p_value = stats::rank_sum(g.distributions[GenderPairing::MrMs], g.distributions[GenderPairing::MsMr]);
  return g;
}

}  // namespace te
