#include "te/gardenpath.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "te/data.hpp"
#include "te/error.hpp"
#include "te/stats.hpp"
#include "te/util.hpp"

namespace te {

std::string_view to_string(SentenceKind k) { return k == SentenceKind::GardenPath ? "garden_path" : "control"; }
std::string_view to_string(VerbClass v) { return v == VerbClass::OT ? "OT" : "RAT"; }
std::string_view to_string(SentenceDataset d) {
  return d == SentenceDataset::Christianson2001 ? "christianson2001" : "authors";
}

SentenceDataset parse_sentence_dataset(std::string_view s) {
  if (s == "christianson2001") return SentenceDataset::Christianson2001;
  if (s == "authors") return SentenceDataset::Authors;
  throw Error(ErrorCode::ConfigError, "unknown sentence dataset '" + std::string(s) + "'");
}

std::vector<SentenceItem> load_sentences(SentenceDataset dataset, const std::optional<std::filesystem::path>& data_dir) {
  const std::string rel = "sentences/" + std::string(to_string(dataset)) + ".tsv";
  const auto rows = data::parse_tsv(data::read(rel, data_dir), {"pair", "verb_class", "garden_path", "control"});
  std::vector<SentenceItem> items;
  for (const auto& row : rows) {
    const int pair = std::stoi(row[0]);
    VerbClass vc;
    if (row[1] == "OT") {
      vc = VerbClass::OT;
    } else if (row[1] == "RAT") {
      vc = VerbClass::RAT;
    } else {
      throw Error(ErrorCode::DataMissing, rel + ": unknown verb class " + row[1]);
    }
    char id[64];
    std::snprintf(id, sizeof id, "%s_%02d_", std::string(to_string(dataset)).c_str(), pair);
    items.push_back({std::string(id) + "gp", row[2], SentenceKind::GardenPath, vc, dataset, pair});
    items.push_back({std::string(id) + "ctl", row[3], SentenceKind::Control, vc, dataset, pair});
  }
  if (items.size() != 48) throw Error(ErrorCode::DataMissing, rel + " should hold 24 sentence pairs");
  return items;
}

ChoiceQuery build_gp_prompt(const ParticipantName& name, const SentenceItem& item) {
  const std::string n = name.display();
  std::string s = n + " was asked to indicate whether the following sentence was grammatical or ungrammatical.\n\n";
  s += "Sentence: " + item.text + "\n\n";
  s += "Answer: " + n + " indicated that the sentence was";
  return {std::move(s), {"grammatical", "ungrammatical"}};
}

BatchResult<GPResult> run_gp(const std::vector<ParticipantName>& names, const std::vector<SentenceItem>& items,
                             const Backend& backend, const RunOptions& opts) {
  if (names.empty() || items.empty()) throw Error(ErrorCode::EmptySet, "garden path run needs names and items");
  return fan_out<GPResult>(names.size() * items.size(), opts.fan_out, [&](std::size_t i) {
    const auto& name = names[i / items.size()];
    const auto& item = items[i % items.size()];
    const auto outcome = evaluate(build_gp_prompt(name, item), backend, opts.choice, derive_seed(opts.seed, i));
    return GPResult{name, item, outcome.probabilities[1], outcome.validity_rate};
  });
}

const GPCell& GPAnalysis::cell(SentenceKind k, VerbClass v) const {
  for (const auto& c : cells) {
    if (c.kind == k && c.verb_class == v) return c;
  }
  throw Error(ErrorCode::EmptyCategory, "no cell " + std::string(to_string(k)) + "/" + std::string(to_string(v)));
}

GPAnalysis analyze_gp(const std::vector<GPResult>& results) {
  if (results.empty()) throw Error(ErrorCode::IncompleteGrid, "no results");
  std::set<ParticipantName> names;
  std::map<std::string, const SentenceItem*> items;
  std::set<std::pair<ParticipantName, std::string>> cells_seen;
  std::map<std::string, std::vector<double>> per_sentence;
  for (const auto& r : results) {
    names.insert(r.name);
    items.emplace(r.item.id, &r.item);
    if (!cells_seen.insert({r.name, r.item.id}).second) {
      throw Error(ErrorCode::IncompleteGrid, "duplicate result for " + r.name.display() + " / " + r.item.id);
    }
    per_sentence[r.item.id].push_back(r.p_ungrammatical);
  }
  if (cells_seen.size() != names.size() * items.size()) {
    throw Error(ErrorCode::IncompleteGrid, std::to_string(cells_seen.size()) + " results for " +
                                               std::to_string(names.size()) + " names x " +
                                               std::to_string(items.size()) + " items");
  }

  std::map<std::string, double> sentence_mean;
  for (const auto& [id, xs] : per_sentence) sentence_mean[id] = stats::mean(xs);

  GPAnalysis out;
  for (SentenceKind k : {SentenceKind::GardenPath, SentenceKind::Control}) {
    for (VerbClass v : {VerbClass::OT, VerbClass::RAT}) {
      std::vector<double> means;
      for (const auto& [id, item] : items) {
        if (item->kind == k && item->verb_class == v) means.push_back(sentence_mean[id]);
      }
      if (means.empty()) continue;
      const auto s = stats::summarize(means);
      out.cells.push_back({k, v, s.mean, s.sem, s.n});
    }
  }

  std::map<std::pair<SentenceDataset, int>, GPPairPoint> pairs;
  std::map<std::pair<SentenceDataset, int>, int> members;
  for (const auto& [id, item] : items) {
    auto& p = pairs[{item->dataset, item->pair}];
    p.dataset = item->dataset;
    p.pair = item->pair;
    p.verb_class = item->verb_class;
    (item->kind == SentenceKind::GardenPath ? p.gp_mean : p.control_mean) = sentence_mean[id];
    members[{item->dataset, item->pair}] += item->kind == SentenceKind::GardenPath ? 1 : 2;
  }
  for (auto& [key, p] : pairs) {
    if (members[key] != 3) continue;  // only complete garden-path/control pairs are compared
    p.violating = p.gp_mean <= p.control_mean;
    if (p.violating) ++out.violating_pairs;
    out.pairs.push_back(p);
  }
  return out;
}

}  // namespace te
