#include "te/record_io.hpp"

#include <fstream>

#include "te/error.hpp"

namespace te {

using nlohmann::json;

json to_json(const ParticipantName& p) {
  return json{{"title", to_string(p.title)},
              {"surname", p.surname},
              {"race_group", to_string(p.race_group)}};
}

ParticipantName participant_from_json(const json& j) {
  ParticipantName p;
  p.title = parse_title(j.at("title").get<std::string>());
  p.surname = j.at("surname").get<std::string>();
  p.race_group = parse_race_group(j.at("race_group").get<std::string>());
  return p;
}

json to_json(const Outcome& o) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UGDecision>) {
          return {{"type", "UGDecision"}, {"accepted", v.accepted}};
        } else if constexpr (std::is_same_v<T, Grammaticality>) {
          return {{"type", "Grammaticality"}, {"ungrammatical", v.ungrammatical}};
        } else if constexpr (std::is_same_v<T, MilgramOutcome>) {
          return {{"type", "MilgramOutcome"},
                  {"max_punishments", v.max_punishments},
                  {"terminated_early", v.terminated_early},
                  {"cause", to_string(v.cause)}};
        } else {
          json j{{"type", "CrowdEstimate"}};
          j["value"] = v.value ? json(*v.value) : json(nullptr);
          return j;
        }
      },
      o);
}

Outcome outcome_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "UGDecision") return UGDecision{j.at("accepted").get<bool>()};
  if (type == "Grammaticality") return Grammaticality{j.at("ungrammatical").get<bool>()};
  if (type == "MilgramOutcome") {
    return MilgramOutcome{j.at("max_punishments").get<int>(), j.at("terminated_early").get<bool>(),
                          parse_milgram_cause(j.at("cause").get<std::string>())};
  }
  if (type == "CrowdEstimate") {
    const auto& v = j.at("value");
    return CrowdEstimate{v.is_null() ? std::nullopt : std::optional<std::int64_t>(v.get<std::int64_t>())};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown outcome type '" + type + "'");
}

json to_json(const Record& r) {
  json participants = json::array();
  for (const auto& p : r.participants) participants.push_back(to_json(p));
  json segments = json::array();
  for (const auto& s : r.segments) {
    segments.push_back({{"source", to_string(s.source)}, {"text", s.text}});
  }
  return json{{"experiment_id", r.experiment_id},
              {"participants", std::move(participants)},
              {"segments", std::move(segments)},
              {"outcome", to_json(r.outcome)}};
}

Record record_from_json(const json& j) {
  Record r;
  try {
    r.experiment_id = j.at("experiment_id").get<std::string>();
    for (const auto& p : j.at("participants")) r.participants.push_back(participant_from_json(p));
    for (const auto& s : j.at("segments")) {
      r.segments.push_back({parse_segment_source(s.at("source").get<std::string>()), s.at("text").get<std::string>()});
    }
    r.outcome = outcome_from_json(j.at("outcome"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed record: ") + e.what());
  }
  return r;
}

std::string to_jsonl_line(const Record& r, std::optional<double> weight) {
  json j = to_json(r);
  if (weight) j["weight"] = *weight;
  return j.dump();
}

std::vector<JsonlRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<JsonlRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, "bad JSONL line in " + path.string() + ": " + e.what());
    }
    JsonlRecord rec{record_from_json(j), std::nullopt};
    if (j.contains("weight")) rec.weight = j["weight"].get<double>();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace te
