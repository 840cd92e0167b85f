#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "te/core.hpp"

namespace te {

nlohmann::json to_json(const ParticipantName& p);
ParticipantName participant_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::json& j);

/// Keys: experiment_id, participants, segments, outcome.
nlohmann::json to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);

/// One JSON object per line. A weighted entry adds a "weight" key next to
/// the record fields.
std::string to_jsonl_line(const Record& r, std::optional<double> weight = std::nullopt);

struct JsonlRecord {
  Record record;
  std::optional<double> weight;
};

std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace te
