#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "te/data.hpp"
#include "te/error.hpp"
#include "te/name_pool.hpp"
#include "te/util.hpp"

using namespace te;
namespace fs = std::filesystem;

TEST_CASE("bundled surnames") {
  const auto pool = load_surnames();
  CHECK(pool.total() == 500);
  CHECK(pool.groups.at(RaceGroup::White).front() == "Olson");
  CHECK(pool.groups.at(RaceGroup::AsianPacificIslander).front() == "Nguyen");
  std::set<std::string> distinct;
  for (const auto& [g, names] : pool.groups) {
    CHECK(names.size() == kSurnamesPerGroup);
    distinct.insert(names.begin(), names.end());
  }
  CHECK(distinct.size() == 500);
}

TEST_CASE("surname loading is byte-stable and checksummed") {
  const auto a = load_surnames();
  const auto b = load_surnames(fs::path(TE_DATA_DIR));
  CHECK(a.groups == b.groups);

  const auto dir = fs::temp_directory_path() / "te_tampered_data";
  fs::remove_all(dir);
  fs::create_directories(dir / "surnames");
  for (RaceGroup g : kAllRaceGroups) {
    const std::string rel = "surnames/" + std::string(surname_file_stem(g)) + ".txt";
    fs::copy_file(fs::path(TE_DATA_DIR) / rel, dir / rel);
  }
  std::ofstream(dir / "surnames/white.txt", std::ios::app) << "Extra\n";
  CHECK_THROWS_WITH_AS(load_surnames(dir), doctest::Contains("ChecksumMismatch"), Error);
  fs::remove(dir / "surnames/white.txt");
  CHECK_THROWS_WITH_AS(load_surnames(dir), doctest::Contains("DataMissing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("build_names sizes and order") {
  const auto pool = load_surnames();
  CHECK(build_names(pool, {Title::Mr, Title::Ms}).size() == 1000);
  CHECK(build_names(pool, {Title::Mr, Title::Ms, Title::Mx}).size() == 1500);
  const auto mr = build_names(pool, {Title::Mr});
  CHECK(mr.size() == 500);
  for (const auto& n : mr) CHECK(n.title == Title::Mr);
  const auto both = build_names(pool, {Title::Mr, Title::Ms});
  CHECK(both[0].title == Title::Mr);
  CHECK(both[500].title == Title::Ms);
}

TEST_CASE("property: pairing passes the balance audit for many seeds") {
  const auto pool = load_surnames();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CAPTURE(seed);
    const auto design = build_ug_pairing(pool, seed);
    CHECK(oracle::audit_pairing(pool, design) == "");
  }
  CHECK(build_ug_pairing(pool, 9).pairs == build_ug_pairing(pool, 9).pairs);
  CHECK_FALSE(build_ug_pairing(pool, 9).pairs == build_ug_pairing(pool, 10).pairs);
}

TEST_CASE("toy pool partner counts") {
  SurnamePool toy;
  toy.groups[RaceGroup::White] = {"A", "B", "C"};
  toy.groups[RaceGroup::HispanicLatino] = {"D", "E", "F"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pairs = build_surname_pairs(toy, seed);
    CHECK(pairs.size() == 12);
    std::map<std::string, int> chosen;
    std::map<std::pair<std::string, RaceGroup>, int> per_group;
    for (const auto& p : pairs) {
      CHECK(p.source != p.partner);
      ++chosen[p.partner];
      ++per_group[{p.source, p.partner_group}];
    }
    for (const auto& [s, c] : chosen) CHECK(c == 2);
    for (const auto& [k, c] : per_group) CHECK(c == 1);
  }
  SurnamePool uneven = toy;
  uneven.groups[RaceGroup::White].pop_back();
  CHECK_THROWS_AS(build_surname_pairs(uneven, 0), Error);
}

TEST_CASE("milgram subjects") {
  const auto pool = load_surnames();
  const auto s = milgram_subjects(pool);
  CHECK(s.size() == 100);
  std::map<std::pair<Title, RaceGroup>, int> cells;
  for (const auto& n : s) ++cells[{n.title, n.race_group}];
  CHECK(cells.size() == 10);
  for (const auto& [k, c] : cells) CHECK(c == 10);
}
