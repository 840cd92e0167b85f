#include "te/name_pool.hpp"

#include <set>
#include <sstream>

#include "te/data.hpp"
#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

std::size_t SurnamePool::total() const {
  std::size_t n = 0;
  for (const auto& [g, names] : groups) n += names.size();
  return n;
}

std::string_view surname_file_stem(RaceGroup g) {
  switch (g) {
    case RaceGroup::AmericanIndianAlaskaNative: return "american_indian_alaska_native";
    case RaceGroup::AsianPacificIslander: return "asian_pacific_islander";
    case RaceGroup::BlackAfricanAmerican: return "black_african_american";
    case RaceGroup::HispanicLatino: return "hispanic_latino";
    case RaceGroup::White: return "white";
  }
  return "";
}

SurnamePool load_surnames(const std::optional<std::filesystem::path>& data_dir) {
  SurnamePool pool;
  std::set<std::string> seen;
  for (RaceGroup g : kAllRaceGroups) {
    const auto rel = "surnames/" + std::string(surname_file_stem(g)) + ".txt";
    std::istringstream in(data::read(rel, data_dir));
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
      const auto name = trim(line);
      if (!name.empty()) names.emplace_back(name);
    }
    if (names.size() != kSurnamesPerGroup) {
      throw Error(ErrorCode::DataMissing, rel + " has " + std::to_string(names.size()) + " surnames");
    }
    seen.insert(names.begin(), names.end());
    pool.groups.emplace(g, std::move(names));
  }
  if (seen.size() != kSurnamesPerGroup * std::size(kAllRaceGroups)) {
    throw Error(ErrorCode::DataMissing, "surname lists overlap");
  }
  return pool;
}

std::vector<ParticipantName> build_names(const SurnamePool& pool, const std::vector<Title>& titles) {
  std::vector<ParticipantName> out;
  out.reserve(titles.size() * pool.total());
  for (Title t : titles) {
    for (const auto& [g, names] : pool.groups) {
      for (const auto& s : names) out.push_back({t, s, g});
    }
  }
  return out;
}

std::vector<SurnamePair> build_surname_pairs(const SurnamePool& pool, std::uint64_t seed) {
  if (pool.groups.empty()) throw Error(ErrorCode::EmptySet, "empty surname pool");
  const std::size_t n = pool.groups.begin()->second.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pairing needs at least two surnames per group");
  for (const auto& [g, names] : pool.groups) {
    if (names.size() != n) throw Error(ErrorCode::InvalidArgument, "pairing needs equal group sizes");
  }

  Rng rng(seed);
  std::map<RaceGroup, std::vector<std::string>> shuffled;
  for (const auto& [g, names] : pool.groups) {
    auto v = names;
    rng.shuffle(v);
    shuffled.emplace(g, std::move(v));
  }
  // Source i of group h takes partner (i + shift[h][g]) mod n of group g. Each
  // shift is a bijection on indices, so every surname is chosen exactly once
  // per source group; a nonzero own-group shift rules out self-pairing.
  std::map<std::pair<RaceGroup, RaceGroup>, std::size_t> shift;
  for (const auto& [h, unused_h] : shuffled) {
    for (const auto& [g, unused_g] : shuffled) {
      shift[{h, g}] = h == g ? 1 + rng.below(n - 1) : rng.below(n);
    }
  }

  std::vector<SurnamePair> out;
  out.reserve(n * shuffled.size() * shuffled.size());
  for (const auto& [h, sources] : shuffled) {
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& [g, partners] : shuffled) {
        out.push_back({sources[i], h, partners[(i + shift[{h, g}]) % n], g});
      }
    }
  }
  return out;
}

PairingDesign build_ug_pairing(const SurnamePool& pool, std::uint64_t seed) {
  constexpr Title kTitles[] = {Title::Mr, Title::Ms};
  PairingDesign design;
  const auto surname_pairs = build_surname_pairs(pool, seed);
  design.pairs.reserve(surname_pairs.size() * 4);
  for (const auto& sp : surname_pairs) {
    for (Title pt : kTitles) {
      for (Title rt : kTitles) {
        design.pairs.push_back({{pt, sp.source, sp.source_group}, {rt, sp.partner, sp.partner_group}});
      }
    }
  }
  return design;
}

std::vector<ParticipantName> milgram_subjects(const SurnamePool& pool, std::size_t per_group) {
  std::vector<ParticipantName> out;
  for (Title t : {Title::Mr, Title::Ms}) {
    for (const auto& [g, names] : pool.groups) {
      if (names.size() < per_group) throw Error(ErrorCode::InvalidArgument, "group smaller than per_group");
      for (std::size_t i = 0; i < per_group; ++i) out.push_back({t, names[i], g});
    }
  }
  return out;
}

}  // namespace te
