#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "te/core.hpp"
#include "te/data.hpp"
#include "te/error.hpp"
#include "te/record_io.hpp"
#include "te/util.hpp"

using namespace te;

namespace {

Record random_record(Rng& rng) {
  static const std::vector<std::string> kIds = {"ultimatum", "gardenpath", "milgram", "milgram_novel", "crowd"};
  Record r;
  r.experiment_id = kIds[rng.below(kIds.size())];
  const auto n_participants = 1 + rng.below(2);
  for (std::uint64_t i = 0; i < n_participants; ++i) {
    r.participants.push_back({static_cast<Title>(rng.below(3)), "Name" + std::to_string(rng.below(1000)),
                              kAllRaceGroups[rng.below(5)]});
  }
  const auto n_segments = 1 + rng.below(6);
  for (std::uint64_t i = 0; i < n_segments; ++i) {
    std::string text;
    const auto len = 1 + rng.below(40);
    for (std::uint64_t k = 0; k < len; ++k) {
      // Include quotes, escapes, newlines, tabs and multi-byte text.
      static const std::vector<std::string> kAlphabet = {"a", "Z", " ", "\n", "\t", "\"", "\\", "$", "é", "語", "}"};
      text += kAlphabet[rng.below(kAlphabet.size())];
    }
    r.segments.push_back({static_cast<SegmentSource>(rng.below(4)), text});
  }
  if (r.experiment_id == "ultimatum") {
    r.outcome = UGDecision{rng.below(2) == 1};
  } else if (r.experiment_id == "gardenpath") {
    r.outcome = Grammaticality{rng.below(2) == 1};
  } else if (r.experiment_id == "crowd") {
    r.outcome = rng.below(2) ? CrowdEstimate{static_cast<std::int64_t>(rng.next() >> 2)} : CrowdEstimate{};
  } else {
    r.outcome = MilgramOutcome{static_cast<int>(rng.below(31)), rng.below(2) == 1,
                               static_cast<MilgramCause>(rng.below(3))};
  }
  return r;
}

}  // namespace

TEST_CASE("participant display and pronouns") {
  CHECK(ParticipantName{Title::Ms, "Huang", RaceGroup::AsianPacificIslander}.display() == "Ms. Huang");
  CHECK(ParticipantName{Title::Mx, "Olson", RaceGroup::White}.display() == "Mx. Olson");
  CHECK(parse_title("Mr.") == Title::Mr);
  CHECK(parse_title("Ms") == Title::Ms);
  CHECK_THROWS_AS(parse_title("Dr"), Error);
  CHECK(possessive_pronoun(Title::Ms) == "her");
  CHECK(object_pronoun(Title::Mr) == "him");
  CHECK(reflexive_pronoun(Title::Mx) == "themself");
}

TEST_CASE("sampling params validation") {
  SamplingParams p;
  CHECK_NOTHROW(p.validate());
  p.top_p = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.max_tokens = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("normalize_weights examples") {
  const std::vector<double> a{2, 2};
  const auto na = normalize_weights(a);
  CHECK(na == std::vector<double>{0.5, 0.5});
  const std::vector<double> b{1, 0, 3};
  const auto nb = normalize_weights(b);
  CHECK(nb[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(nb[1] == 0.0);
  CHECK(nb[2] == doctest::Approx(0.75).epsilon(1e-15));
  const std::vector<double> c{0.3, 0.1};
  const auto nc = normalize_weights(c);
  CHECK(std::abs(nc[0] - 0.75) < 1e-12);
  CHECK(std::abs(nc[1] - 0.25) < 1e-12);
  const std::vector<double> zero{0, 0};
  CHECK_THROWS_WITH_AS(normalize_weights(zero), doctest::Contains("AllZero"), Error);
  const std::vector<double> neg{1, -1};
  CHECK_THROWS_WITH_AS(normalize_weights(neg), doctest::Contains("NegativeWeight"), Error);
}

TEST_CASE("check_normalized rejects bad sets") {
  const std::vector<double> ok{0.25, 0.75};
  CHECK_NOTHROW(check_normalized(ok));
  const std::vector<double> off{0.5, 0.6};
  CHECK_THROWS_WITH_AS(check_normalized(off), doctest::Contains("UnnormalizedWeights"), Error);
  CHECK_THROWS_WITH_AS(check_normalized(std::vector<double>{}), doctest::Contains("EmptySet"), Error);
}

TEST_CASE("sample_record distribution") {
  Record a;
  a.experiment_id = "ultimatum";
  a.outcome = UGDecision{true};
  Record b = a;
  b.outcome = UGDecision{false};

  SUBCASE("single entry is always chosen") {
    const auto set = WeightedRecordSet::single(a);
    for (std::uint64_t s = 0; s < 100; ++s) CHECK(sample_record(set, s) == a);
  }
  SUBCASE("zero weight is never chosen") {
    const WeightedRecordSet set({{a, 1.0}, {b, 0.0}});
    for (std::uint64_t s = 0; s < 1000; ++s) CHECK(sample_record(set, s) == a);
  }
  SUBCASE("even weights follow the binomial band") {
    const WeightedRecordSet set({{a, 0.5}, {b, 0.5}});
    int first = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) first += sample_record(set, s) == a;
    CHECK(std::abs(first - 5000) <= 150);
  }
  CHECK_THROWS_AS(WeightedRecordSet({{a, 0.7}, {b, 0.7}}), Error);
}

TEST_CASE("record validation ties outcomes to experiments") {
  Record r;
  r.experiment_id = "ultimatum";
  r.outcome = Grammaticality{true};
  CHECK_THROWS_AS(r.validate(), Error);
  r.outcome = UGDecision{true};
  r.segments = {{SegmentSource::Template, ""}};
  CHECK_THROWS_AS(r.validate(), Error);
  r.segments = {{SegmentSource::Template, "a"}, {SegmentSource::ModelGenerated, "b"}};
  CHECK_NOTHROW(r.validate());
  CHECK(r.transcript() == "ab");
}

TEST_CASE("property: record serialization round-trips") {
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    const Record r = random_record(rng);
    const Record back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    REQUIRE(back == r);
    const auto line = to_jsonl_line(r, 0.25);
    CHECK(line.find('\n') == std::string::npos);
  }
}

TEST_CASE("jsonl file round trip with weights") {
  Rng rng(7);
  const auto path = std::filesystem::temp_directory_path() / "te_core_roundtrip.jsonl";
  std::vector<Record> records;
  {
    std::ofstream out(path);
    for (int i = 0; i < 50; ++i) {
      records.push_back(random_record(rng));
      out << to_jsonl_line(records.back(), i % 2 ? std::optional<double>(0.5) : std::nullopt) << "\n";
    }
  }
  const auto back = read_jsonl(path);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].record == records[i]);
    CHECK(back[i].weight.has_value() == (i % 2 == 1));
  }
  std::filesystem::remove(path);
}

TEST_CASE("util helpers") {
  CHECK(crc32("123456789") == 0xCBF43926u);
  CHECK(format_fixed(99.5, 1) == "99.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(trim("  x y \n") == "x y");
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  Rng r(3);
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  r.shuffle(v);
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("bundled data checksums are stable") {
  for (const auto& [path, crc] : data::bundled_checksums()) {
    CAPTURE(path);
    CHECK(crc32(data::read(path)) == crc);
    CHECK(crc32(data::read(path)) == crc32(data::read(path)));
  }
  CHECK_THROWS_WITH_AS(data::read("missing.tsv"), doctest::Contains("DataMissing"), Error);
}
