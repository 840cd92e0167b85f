#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "te/core.hpp"

namespace te {

inline constexpr std::size_t kSurnamesPerGroup = 100;

/// Ordered surname lists keyed by census race group.
struct SurnamePool {
  std::map<RaceGroup, std::vector<std::string>> groups;

  std::size_t total() const;
};

/// Bundled file stem for a group, e.g. "asian_pacific_islander".
std::string_view surname_file_stem(RaceGroup g);

/// The bundled census surname lists, order preserved. Throws DataMissing or
/// ChecksumMismatch.
SurnamePool load_surnames(const std::optional<std::filesystem::path>& data_dir = std::nullopt);

/// titles x groups x surnames, in that nesting order.
std::vector<ParticipantName> build_names(const SurnamePool& pool, const std::vector<Title>& titles);

struct UGPair {
  ParticipantName proposer;
  ParticipantName responder;
  bool operator==(const UGPair&) const = default;
};

struct PairingDesign {
  std::vector<UGPair> pairs;
};

/// Surname-level pairing: every surname is assigned one partner from each
/// group (never itself), and every surname is chosen as a partner exactly
/// once by each group. Requires equal group sizes of at least 2.
struct SurnamePair {
  std::string source;
  RaceGroup source_group;
  std::string partner;
  RaceGroup partner_group;
};
std::vector<SurnamePair> build_surname_pairs(const SurnamePool& pool, std::uint64_t seed);

/// Expands the surname pairs by the Mr/Ms x Mr/Ms title grid with the source
/// surname as proposer. Deterministic for a fixed seed.
PairingDesign build_ug_pairing(const SurnamePool& pool, std::uint64_t seed);

/// The first `per_group` surnames of each group under each of Mr and Ms.
std::vector<ParticipantName> milgram_subjects(const SurnamePool& pool, std::size_t per_group = 10);

}  // namespace te
