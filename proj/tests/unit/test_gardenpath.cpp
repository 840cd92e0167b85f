#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "te/error.hpp"
#include "te/gardenpath.hpp"
#include "te/name_pool.hpp"
#include "te/policies.hpp"

using namespace te;

namespace {

const ParticipantName kOlson{Title::Ms, "Olson", RaceGroup::White};

std::vector<SentenceItem> all_items() {
  auto a = load_sentences(SentenceDataset::Christianson2001);
  const auto b = load_sentences(SentenceDataset::Authors);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

GPResult gp(const std::string& name, const SentenceItem& item, double p) {
  return {{Title::Mr, name, RaceGroup::White}, item, p, 1.0};
}

}  // namespace

TEST_CASE("sentence datasets") {
  const auto c = load_sentences(SentenceDataset::Christianson2001);
  const auto a = load_sentences(SentenceDataset::Authors);
  CHECK(c.size() == 48);
  CHECK(a.size() == 48);
  const auto& first = c.front();
  CHECK(first.kind == SentenceKind::GardenPath);
  CHECK(first.verb_class == VerbClass::OT);
  CHECK(first.text == "While the man hunted the deer that was brown and graceful ran into the woods.");
  bool found_control = false;
  for (const auto& it : c) {
    if (it.pair == first.pair && it.kind == SentenceKind::Control) {
      found_control = true;
      CHECK(it.text == "While the man hunted, the deer that was brown and graceful ran into the woods.");
    }
  }
  CHECK(found_control);
  std::map<std::pair<SentenceKind, VerbClass>, int> cells;
  for (const auto& it : c) ++cells[{it.kind, it.verb_class}];
  for (const auto& [k, n] : cells) CHECK(n == 12);
  CHECK(parse_sentence_dataset("authors") == SentenceDataset::Authors);
  CHECK_THROWS_AS(parse_sentence_dataset("other"), Error);
}

TEST_CASE("garden path prompt") {
  const auto items = load_sentences(SentenceDataset::Christianson2001);
  const SentenceItem* student = nullptr;
  for (const auto& it : items) {
    if (it.kind == SentenceKind::GardenPath && it.text.starts_with("While the student read")) student = &it;
  }
  REQUIRE(student != nullptr);
  const auto q = build_gp_prompt(kOlson, *student);
  CHECK(q.prompt ==
        "Ms. Olson was asked to indicate whether the following sentence was grammatical or ungrammatical.\n\n"
        "Sentence: While the student read the notes that were long and boring blew off the desk.\n\n"
        "Answer: Ms. Olson indicated that the sentence was");
  CHECK(q.choices == std::vector<std::string>{"grammatical", "ungrammatical"});

  const ParticipantName other{Title::Mr, "Nguyen", RaceGroup::AsianPacificIslander};
  auto swapped = build_gp_prompt(other, *student).prompt;
  std::size_t pos;
  while ((pos = swapped.find("Mr. Nguyen")) != std::string::npos) swapped.replace(pos, 10, "Ms. Olson");
  CHECK(swapped == q.prompt);

  for (const auto& it : items) {
    if (it.pair == student->pair && it.kind == SentenceKind::Control) {
      CHECK(build_gp_prompt(kOlson, it).prompt.find("While the student read, the notes") != std::string::npos);
    }
  }
}

TEST_CASE("policy oracle recovers 0.8 / 0.2 exactly") {
  const auto items = all_items();
  auto names = build_names(load_surnames(), {Title::Mr, Title::Ms});
  names.resize(6);
  const auto backend = policy::make_backend("gp", policy::gp_by_kind(items));
  const auto res = run_gp(names, items, *backend).values();
  REQUIRE(res.size() == names.size() * items.size());
  for (const auto& r : res) {
    const double expect = r.item.kind == SentenceKind::GardenPath ? 0.8 : 0.2;
    CHECK(std::abs(r.p_ungrammatical - expect) < 1e-12);
    // Complementary probabilities for each cell.
    const auto q = build_gp_prompt(r.name, r.item);
    const double pg = std::exp(backend->score(q.prompt, "grammatical"));
    const double pu = std::exp(backend->score(q.prompt, "ungrammatical"));
    CHECK(std::abs(pg / (pg + pu) + pu / (pg + pu) - 1.0) < 1e-9);
  }
  const auto a = analyze_gp(res);
  CHECK(std::abs(a.cell(SentenceKind::GardenPath, VerbClass::OT).mean - 0.8) < 1e-12);
  CHECK(std::abs(a.cell(SentenceKind::GardenPath, VerbClass::RAT).mean - 0.8) < 1e-12);
  CHECK(std::abs(a.cell(SentenceKind::Control, VerbClass::OT).mean - 0.2) < 1e-12);
  CHECK(std::abs(a.cell(SentenceKind::Control, VerbClass::RAT).mean - 0.2) < 1e-12);
  CHECK(a.violating_pairs == 0);
  CHECK(a.pairs.size() == 48);
}

TEST_CASE("grammatical-always mock and minimal run") {
  const auto items = load_sentences(SentenceDataset::Authors);
  const auto backend = policy::make_backend(
      "g", [](const std::string&) { return std::vector<PolicyOption>{{" grammatical.", 1.0}}; });
  const std::vector<ParticipantName> one{kOlson};
  for (const auto& r : run_gp(one, items, *backend).values()) CHECK(r.p_ungrammatical == 0.0);
  const std::vector<SentenceItem> single{items.front()};
  CHECK(run_gp(one, single, *backend).values().size() == 1);
}

TEST_CASE("SEM is taken over per-sentence means") {
  const auto items = load_sentences(SentenceDataset::Christianson2001);
  std::vector<SentenceItem> gp_ot;
  for (const auto& it : items) {
    if (it.kind == SentenceKind::GardenPath && it.verb_class == VerbClass::OT && gp_ot.size() < 3) gp_ot.push_back(it);
  }
  // Two names with different values per sentence; the oracle averages over
  // names first, then takes the dispersion of those three sentence means.
  const std::vector<std::vector<double>> p{{0.1, 0.3}, {0.5, 0.9}, {0.2, 0.2}};
  std::vector<GPResult> rs;
  std::vector<double> sentence_means;
  for (std::size_t s = 0; s < 3; ++s) {
    rs.push_back(gp("A", gp_ot[s], p[s][0]));
    rs.push_back(gp("B", gp_ot[s], p[s][1]));
    sentence_means.push_back((p[s][0] + p[s][1]) / 2);
  }
  const auto a = analyze_gp(rs);
  const auto& cell = a.cell(SentenceKind::GardenPath, VerbClass::OT);
  CHECK(cell.n_sentences == 3);
  CHECK(std::abs(cell.mean - static_cast<double>(oracle::mean(sentence_means))) < 1e-12);
  CHECK(std::abs(cell.sem - static_cast<double>(oracle::sample_sd(sentence_means) / std::sqrt(3.0L))) < 1e-12);
}

TEST_CASE("uniform mock and violating pair") {
  const auto items = load_sentences(SentenceDataset::Christianson2001);
  std::vector<GPResult> rs;
  for (const auto& it : items) rs.push_back(gp("A", it, 0.5));
  const auto a = analyze_gp(rs);
  for (const auto& c : a.cells) {
    CHECK(c.mean == 0.5);
    CHECK(c.sem == 0.0);
  }
  CHECK(a.violating_pairs == 48 / 2);  // ties count as violations

  std::vector<GPResult> pair;
  for (const auto& it : items) {
    if (it.pair == 1) pair.push_back(gp("A", it, it.kind == SentenceKind::GardenPath ? 0.3 : 0.6));
  }
  const auto b = analyze_gp(pair);
  REQUIRE(b.pairs.size() == 1);
  CHECK(b.pairs[0].violating);
  CHECK(b.violating_pairs == 1);

  rs.pop_back();
  rs.push_back(gp("B", items.front(), 0.5));
  CHECK_THROWS_WITH_AS(analyze_gp(rs), doctest::Contains("IncompleteGrid"), Error);
}
