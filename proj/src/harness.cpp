#include "te/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "te/cache.hpp"
#include "te/crowd.hpp"
#include "te/data.hpp"
#include "te/error.hpp"
#include "te/gardenpath.hpp"
#include "te/http_backend.hpp"
#include "te/milgram.hpp"
#include "te/name_pool.hpp"
#include "te/policies.hpp"
#include "te/record_io.hpp"
#include "te/stats.hpp"
#include "te/svg.hpp"
#include "te/ultimatum.hpp"
#include "te/util.hpp"

#ifndef TE_VERSION
#define TE_VERSION "unknown"
#endif

namespace te {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view code_version() { return TE_VERSION; }

std::string_view to_string(RunMode m) { return m == RunMode::Validate ? "validate" : "full"; }

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Http: return "http";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Policy: return "policy";
  }
  return "?";
}

RunConfig RunConfig::from(const FlatConfig& cfg, RunMode mode) {
  RunConfig rc;
  rc.raw = cfg;
  rc.mode = mode;
  if (cfg.has("mode") && cfg.get_string("mode") != to_string(mode)) {
    throw Error(ErrorCode::ConfigError, "config mode '" + cfg.get_string("mode") + "' conflicts with command '" +
                                            std::string(to_string(mode)) + "'");
  }
  rc.experiment = cfg.get_string("experiment");
  static const std::set<std::string_view> kExperiments = {experiment::kUltimatum, experiment::kGardenPath,
                                                          experiment::kMilgram, experiment::kMilgramNovel,
                                                          experiment::kCrowd};
  if (!kExperiments.count(rc.experiment)) throw Error(ErrorCode::ConfigError, "unknown experiment " + rc.experiment);

  const auto kind = cfg.get_string("backend.kind", "policy");
  if (kind == "http") {
    rc.backend = BackendKind::Http;
  } else if (kind == "scripted") {
    rc.backend = BackendKind::Scripted;
  } else if (kind == "policy") {
    rc.backend = BackendKind::Policy;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown backend.kind " + kind);
  }

  const auto seed = cfg.get_int("seed", 0);
  if (seed < 0) throw Error(ErrorCode::ConfigError, "seed must be non-negative");
  rc.seed = static_cast<std::uint64_t>(seed);
  const auto conc = cfg.get_int("concurrency", 1);
  if (conc < 1) throw Error(ErrorCode::ConfigError, "concurrency must be positive");
  rc.concurrency = static_cast<std::size_t>(conc);
  rc.output_dir = cfg.get_string("output_dir");
  if (cfg.has("cache_dir")) rc.cache_dir = cfg.get_string("cache_dir");
  if (cfg.has("data_dir")) rc.data_dir = cfg.get_string("data_dir");
  if (cfg.has("limit")) {
    const auto lim = cfg.get_int("limit");
    if (lim < 1) throw Error(ErrorCode::ConfigError, "limit must be positive");
    rc.limit = static_cast<std::size_t>(lim);
  }
  try {
    rc.choice.mode = parse_choice_mode(cfg.get_string("choice.mode", "scored"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  const auto samples = cfg.get_int("choice.samples", 100);
  if (samples < 1) throw Error(ErrorCode::ConfigError, "choice.samples must be positive");
  rc.choice.samples = static_cast<std::size_t>(samples);
  return rc;
}

namespace {

// ---------------------------------------------------------------------------
// Experiment inputs

struct Inputs {
  std::string experiment;
  PairingDesign design;
  std::vector<int> offers;
  std::vector<ParticipantName> names;
  std::vector<SentenceItem> sentences;
  std::vector<CrowdQuestion> questions;
  const ScenarioSpec* scenario = nullptr;

  std::size_t n_items() const {
    if (experiment == experiment::kUltimatum) return design.pairs.size() * offers.size();
    if (experiment == experiment::kGardenPath) return names.size() * sentences.size();
    if (experiment == experiment::kCrowd) return names.size() * questions.size();
    return names.size();
  }
  bool is_milgram() const { return scenario != nullptr; }
};

template <typename T>
void apply_limit(std::vector<T>& v, const std::optional<std::size_t>& limit) {
  if (limit && *limit < v.size()) v.resize(*limit);
}

Inputs build_inputs(const RunConfig& cfg) {
  Inputs in;
  in.experiment = cfg.experiment;
  const SurnamePool pool = load_surnames(cfg.data_dir);
  if (cfg.experiment == experiment::kUltimatum) {
    const auto pairing_seed = cfg.raw.get_int("ultimatum.pairing_seed", static_cast<std::int64_t>(cfg.seed));
    in.design = build_ug_pairing(pool, static_cast<std::uint64_t>(pairing_seed));
    apply_limit(in.design.pairs, cfg.limit);
    in.offers = all_offers();
  } else if (cfg.experiment == experiment::kGardenPath) {
    in.names = build_names(pool, {Title::Mr, Title::Ms});
    apply_limit(in.names, cfg.limit);
    const auto which = cfg.raw.get_string("gardenpath.dataset", "both");
    std::vector<SentenceDataset> sets;
    if (which == "both") {
      sets = {SentenceDataset::Christianson2001, SentenceDataset::Authors};
    } else {
      sets = {parse_sentence_dataset(which)};
    }
    for (auto d : sets) {
      auto items = load_sentences(d, cfg.data_dir);
      in.sentences.insert(in.sentences.end(), items.begin(), items.end());
    }
  } else if (cfg.experiment == experiment::kCrowd) {
    in.names = build_names(pool, {Title::Mr, Title::Ms, Title::Mx});
    apply_limit(in.names, cfg.limit);
    in.questions = load_crowd_questions(cfg.data_dir);
  } else {
    in.scenario = &scenario_by_id(cfg.experiment);
    in.names = milgram_subjects(pool);
    apply_limit(in.names, cfg.limit);
  }
  return in;
}

// ---------------------------------------------------------------------------
// Backends

std::map<int, int> parse_histogram(const std::string& text) {
  std::map<int, int> out;
  for (const auto& part : split(text, ',')) {
    const auto t = trim(part);
    if (t.empty()) continue;
    const auto colon = t.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::ConfigError, "histogram entries are level:count");
    try {
      out[std::stoi(std::string(t.substr(0, colon)))] += std::stoi(std::string(t.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad histogram entry '" + std::string(t) + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    const auto t = trim(part);
    if (t.empty()) continue;
    try {
      out.push_back(std::stoi(std::string(t)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad integer '" + std::string(t) + "'");
    }
  }
  return out;
}

PolicyFn make_policy(const RunConfig& cfg, const Inputs& in) {
  const FlatConfig& c = cfg.raw;
  const std::string exp = cfg.experiment;
  if (exp == experiment::kUltimatum) {
    const auto name = c.get_string("policy.name", "logistic");
    if (name == "logistic") {
      policy::UGLogistic p;
      p.slope = c.get_double("policy.slope", p.slope);
      p.midpoint = c.get_double("policy.midpoint", p.midpoint);
      p.intercept_spread = c.get_double("policy.intercept_spread", p.intercept_spread);
      p.validity = c.get_double("policy.validity", p.validity);
      if (c.has("policy.validity_mr")) p.validity_by_responder[Title::Mr] = c.get_double("policy.validity_mr");
      if (c.has("policy.validity_ms")) p.validity_by_responder[Title::Ms] = c.get_double("policy.validity_ms");
      return policy::ug_logistic(p);
    }
    if (name == "titles") {
      std::map<std::pair<Title, Title>, double> m;
      for (Title a : {Title::Mr, Title::Ms}) {
        for (Title b : {Title::Mr, Title::Ms}) {
          const std::string key = "policy.p_" + to_lower(to_string(a)) + "_" + to_lower(to_string(b));
          if (c.has(key)) m[{a, b}] = c.get_double(key);
        }
      }
      return policy::ug_by_titles(m, c.get_double("policy.p_default", 0.5), c.get_double("policy.validity", 1.0));
    }
    if (name == "accept") return policy::ug_always_accept();
  } else if (exp == experiment::kGardenPath) {
    const auto name = c.get_string("policy.name", "by_kind");
    if (name == "by_kind") {
      return policy::gp_by_kind(in.sentences, c.get_double("policy.p_gp", 0.8), c.get_double("policy.p_control", 0.2),
                                c.get_double("policy.validity", 1.0));
    }
  } else if (exp == experiment::kCrowd) {
    const auto name = c.get_string("policy.name", "truth");
    if (name == "truth") {
      return policy::crowd_truth(in.questions, in.names, c.get_double("policy.valid_fraction", 1.0));
    }
  } else {
    const auto name = c.get_string("policy.name", "obedient");
    policy::MilgramScript script;
    script.scenario = in.scenario;
    if (name == "histogram") {
      script.plans = policy::plans_for_histogram(in.names, parse_histogram(c.get_string("policy.breakoffs")),
                                                 parse_int_list(c.get_string("policy.disobey_levels", "")));
      return policy::milgram_scripted(std::move(script));
    }
    if (name == "obedient") return policy::milgram_scripted(std::move(script));
  }
  throw Error(ErrorCode::ConfigError, "unknown policy.name for " + exp);
}

BackendPtr make_backend_for(const RunConfig& cfg, const Inputs& in) {
  const FlatConfig& c = cfg.raw;
  switch (cfg.backend) {
    case BackendKind::Http: {
      HttpBackendConfig h;
      h.base_url = c.get_string("backend.base_url");
      h.model = c.get_string("backend.model");
      h.api_key = c.get_string("backend.api_key", "");
      h.requests_per_minute = c.get_double("backend.requests_per_minute", h.requests_per_minute);
      h.burst = c.get_double("backend.burst", h.burst);
      h.max_attempts = static_cast<int>(c.get_int("backend.max_attempts", h.max_attempts));
      h.timeout = std::chrono::seconds(c.get_int("backend.timeout_s", h.timeout.count()));
      h.max_prompt_chars = static_cast<std::size_t>(c.get_int("backend.max_prompt_chars",
                                                              static_cast<std::int64_t>(h.max_prompt_chars)));
      h.can_score = c.get_bool("backend.can_score", h.can_score);
      return std::make_shared<HttpBackend>(std::move(h));
    }
    case BackendKind::Scripted:
      return ScriptedBackend::from_file(c.get_string("backend.script"));
    case BackendKind::Policy:
      return std::make_shared<PolicyBackend>("policy:" + cfg.experiment + ":" + c.get_string("policy.name", "default"),
                                             make_policy(cfg, in));
  }
  throw Error(ErrorCode::ConfigError, "unknown backend");
}

// ---------------------------------------------------------------------------
// Items

ChoiceQuery choice_query(const Inputs& in, std::size_t i) {
  if (in.experiment == experiment::kUltimatum) {
    const auto& pair = in.design.pairs[i / in.offers.size()];
    return build_ug_prompt({pair.proposer, pair.responder, in.offers[i % in.offers.size()]});
  }
  return build_gp_prompt(in.names[i / in.sentences.size()], in.sentences[i % in.sentences.size()]);
}

json run_item(const Inputs& in, const RunConfig& cfg, const Backend& backend, std::size_t i) {
  const std::uint64_t seed = derive_seed(cfg.seed, i);
  if (in.experiment == experiment::kUltimatum || in.experiment == experiment::kGardenPath) {
    const auto o = evaluate(choice_query(in, i), backend, cfg.choice, seed);
    return {{"p", o.probabilities}, {"z", o.validity_rate}, {"n_samples", o.n_samples}, {"n_valid", o.n_valid}};
  }
  if (in.experiment == experiment::kCrowd) {
    const auto& name = in.names[i / in.questions.size()];
    const auto& q = in.questions[i % in.questions.size()];
    return {{"text", backend.complete(build_crowd_prompt(name, q), crowd_sampling_params(), seed).text}};
  }
  MilgramSettings settings;
  settings.classifier = cfg.choice;
  return to_json(run_subject(in.names[i], *in.scenario, backend, seed, settings));
}

// Validity condition label and per-item validity values.
std::vector<std::pair<std::string, double>> item_validity(const Inputs& in, std::size_t i, const json& r) {
  if (in.experiment == experiment::kUltimatum) {
    return {{"offer=" + std::to_string(in.offers[i % in.offers.size()]), r.at("z").get<double>()}};
  }
  if (in.experiment == experiment::kGardenPath) {
    const auto& s = in.sentences[i % in.sentences.size()];
    return {{std::string(to_string(s.kind)) + "/" + std::string(to_string(s.verb_class)), r.at("z").get<double>()}};
  }
  if (in.experiment == experiment::kCrowd) {
    const auto& q = in.questions[i % in.questions.size()];
    return {{q.id, parse_estimate(r.at("text").get<std::string>()) ? 1.0 : 0.0}};
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& ev : r.at("per_event")) {
    for (const auto& a : ev.at("attempts")) {
      out.emplace_back("termination_classifier", a.at("stop_validity").get<double>());
      if (a.at("p_stop").get<double>() <= 0.5) {
        out.emplace_back("punishment_classifier", a.at("punish_validity").get<double>());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

std::string num(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// Validity report

constexpr std::string_view kValidityHeader = "experiment,condition,n,validity_pct,se_pct";

struct ValidityRow {
  std::string condition;
  std::size_t n = 0;
  double mean = 0.0;
  double sem = 0.0;
};

std::vector<ValidityRow> validity_rows(const Inputs& in, const std::vector<std::optional<json>>& items) {
  std::map<std::string, std::vector<double>> by_condition;
  std::vector<std::string> order;
  std::vector<double> all;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i]) continue;
    for (auto& [cond, z] : item_validity(in, i, *items[i])) {
      if (!by_condition.count(cond)) order.push_back(cond);
      by_condition[cond].push_back(z);
      all.push_back(z);
    }
  }
  std::vector<ValidityRow> rows;
  auto make = [](const std::string& cond, const std::vector<double>& xs) {
    const double sem = xs.size() >= 2 ? stats::sem(xs) : 0.0;
    return ValidityRow{cond, xs.size(), stats::mean(xs), sem};
  };
  if (all.empty()) return rows;
  rows.push_back(make("all", all));
  for (const auto& cond : order) rows.push_back(make(cond, by_condition[cond]));
  return rows;
}

void write_validity(const fs::path& dir, const std::string& experiment, const std::vector<ValidityRow>& rows) {
  std::string csv = std::string(kValidityHeader) + "\n";
  std::string txt = "Validity rate (%) +/- standard error\n\n";
  char line[256];
  for (const auto& r : rows) {
    csv += csv_row({experiment, r.condition, std::to_string(r.n), format_fixed(100.0 * r.mean, 1),
                    format_fixed(100.0 * r.sem, 3)});
    std::snprintf(line, sizeof line, "%-16s %-28s %8zu %7.1f +/- %.3f\n", experiment.c_str(), r.condition.c_str(),
                  r.n, 100.0 * r.mean, 100.0 * r.sem);
    txt += line;
  }
  write_file(dir / "validity.csv", csv);
  write_file(dir / "validity.txt", txt);
}

// ---------------------------------------------------------------------------
// Manifest

// Config as recorded in manifests; secrets are left out.
json public_config(const RunConfig& cfg) {
  json j = cfg.raw.to_json();
  j.erase("backend.api_key");
  return j;
}

json manifest(const RunConfig& cfg, const std::string& backend_id, const std::string& status, std::size_t items,
              std::size_t completed, std::size_t failures) {
  json checksums = json::object();
  char hex[16];
  for (const auto& [path, crc] : data::bundled_checksums()) {
    std::snprintf(hex, sizeof hex, "%08x", crc);
    checksums[std::string(path)] = hex;
  }
  return {{"tool", "te"},
          {"version", std::string(code_version())},
          {"experiment", cfg.experiment},
          {"mode", std::string(to_string(cfg.mode))},
          {"seed", cfg.seed},
          {"backend_id", backend_id},
          {"config", public_config(cfg)},
          {"data_checksums", std::move(checksums)},
          {"status", status},
          {"items", items},
          {"completed", completed},
          {"failures", failures}};
}

const std::set<std::string>& manifest_keys() {
  static const std::set<std::string> keys = {"tool",   "version", "experiment", "mode",      "seed",     "backend_id",
                                             "config", "data_checksums", "status", "items", "completed", "failures"};
  return keys;
}

// Fingerprint of the settings that determine item results.
std::string fingerprint(const RunConfig& cfg) {
  FlatConfig c = cfg.raw;
  json j = c.to_json();
  for (const char* k : {"concurrency", "cache_dir", "output_dir", "backend.api_key"}) j.erase(k);
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return hex;
}

// ---------------------------------------------------------------------------
// Checkpoint: a header line, then {"i": index, "r": result} per completed item.

std::vector<std::optional<json>> load_checkpoint(const fs::path& path, const std::string& fp, std::size_t n) {
  std::vector<std::optional<json>> items(n);
  std::ifstream in(path, std::ios::binary);
  if (!in) return items;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      log_warning("skipping unreadable checkpoint line in " + path.string());
      continue;
    }
    if (first) {
      first = false;
      if (!j.contains("fingerprint") || j.at("fingerprint") != fp) {
        throw Error(ErrorCode::ConfigError,
                    path.parent_path().string() + " holds a run with a different configuration");
      }
      continue;
    }
    const auto i = j.at("i").get<std::size_t>();
    if (i < n) items[i] = j.at("r");
  }
  return items;
}

std::string checkpoint_header(const std::string& fp) { return json{{"fingerprint", fp}}.dump() + "\n"; }

// ---------------------------------------------------------------------------
// Records and per-item results

std::vector<std::pair<Record, double>> item_records(const Inputs& in, std::size_t i, const json& r) {
  std::vector<std::pair<Record, double>> out;
  if (in.experiment == experiment::kUltimatum || in.experiment == experiment::kGardenPath) {
    const auto q = choice_query(in, i);
    const auto p = r.at("p").get<std::vector<double>>();
    for (std::size_t k = 0; k < q.choices.size(); ++k) {
      Record rec;
      rec.experiment_id = in.experiment;
      if (in.experiment == experiment::kUltimatum) {
        const auto& pair = in.design.pairs[i / in.offers.size()];
        rec.participants = {pair.proposer, pair.responder};
        rec.outcome = UGDecision{k == 0};
      } else {
        rec.participants = {in.names[i / in.sentences.size()]};
        rec.outcome = Grammaticality{k == 1};
      }
      rec.segments = {{SegmentSource::Template, q.prompt},
                      {SegmentSource::ModelGenerated, scoring_continuation(q.prompt, q.choices[k])}};
      out.emplace_back(std::move(rec), p[k]);
    }
    return out;
  }
  if (in.experiment == experiment::kCrowd) {
    const auto& name = in.names[i / in.questions.size()];
    const auto& q = in.questions[i % in.questions.size()];
    const auto text = r.at("text").get<std::string>();
    Record rec;
    rec.experiment_id = in.experiment;
    rec.participants = {name};
    rec.segments = {{SegmentSource::Template, build_crowd_prompt(name, q)}};
    if (!text.empty()) rec.segments.push_back({SegmentSource::ModelGenerated, text});
    rec.outcome = CrowdEstimate{parse_estimate(text)};
    out.emplace_back(std::move(rec), 1.0);
    return out;
  }
  out.emplace_back(record_from_json(r.at("record")), 1.0);
  return out;
}

std::string results_csv(const Inputs& in, const std::vector<std::optional<json>>& items) {
  std::string s;
  if (in.experiment == experiment::kUltimatum) {
    s = "pair,proposer,responder,offer,p_accept,validity\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& pair = in.design.pairs[i / in.offers.size()];
      s += csv_row({std::to_string(i / in.offers.size()), pair.proposer.display(), pair.responder.display(),
                    std::to_string(in.offers[i % in.offers.size()]), num(items[i]->at("p")[0].get<double>()),
                    num(items[i]->at("z").get<double>())});
    }
  } else if (in.experiment == experiment::kGardenPath) {
    s = "name,item_id,kind,verb_class,p_ungrammatical,validity\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& it = in.sentences[i % in.sentences.size()];
      s += csv_row({in.names[i / in.sentences.size()].display(), it.id, std::string(to_string(it.kind)),
                    std::string(to_string(it.verb_class)), num(items[i]->at("p")[1].get<double>()),
                    num(items[i]->at("z").get<double>())});
    }
  } else if (in.experiment == experiment::kCrowd) {
    s = "name,question_id,estimate,completion\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto text = items[i]->at("text").get<std::string>();
      const auto est = parse_estimate(text);
      s += csv_row({in.names[i / in.questions.size()].display(), in.questions[i % in.questions.size()].id,
                    est ? std::to_string(*est) : "invalid", text});
    }
  } else {
    s = "name,max_punishments,terminated_early,cause\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto rec = record_from_json(items[i]->at("record"));
      const auto& o = std::get<MilgramOutcome>(rec.outcome);
      s += csv_row({in.names[i].display(), std::to_string(o.max_punishments), o.terminated_early ? "true" : "false",
                    std::string(to_string(o.cause))});
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reports

struct ReportFiles {
  std::string summary;
  std::string text;
  std::map<std::string, std::string> plots;  // file name under plots/ -> content
};

void report_ultimatum(const Inputs& in, const std::vector<std::optional<json>>& items, ReportFiles& out) {
  std::vector<UGResult> results;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t pair = i / in.offers.size();
    const UGCondition cond{in.design.pairs[pair].proposer, in.design.pairs[pair].responder,
                           in.offers[i % in.offers.size()]};
    results.push_back({pair, cond, items[i]->at("p")[0].get<double>(), items[i]->at("z").get<double>()});
  }
  const auto curve = analyze_offer_curve(results, in.offers);
  out.summary = "offer,mean_p_accept,sem,n\n";
  out.text = "Acceptance by offer (mean +/- SEM over pairs)\n\n  offer  accept     sem       n\n";
  svg::Series series{"mean acceptance", {}};
  char line[128];
  for (const auto& p : curve) {
    out.summary += csv_row({std::to_string(p.offer), num(p.mean), num(p.sem), std::to_string(p.n)});
    std::snprintf(line, sizeof line, "  %5d  %6.4f  %6.4f  %6zu\n", p.offer, p.mean, p.sem, p.n);
    out.text += line;
    series.points.emplace_back(p.offer, p.mean);
  }
  out.plots["offer_curve.csv"] = out.summary;
  out.plots["offer_curve.svg"] =
      svg::line_chart("Acceptance probability by offer", "offer ($)", "p(accept)", {series});

  try {
    const auto m = analyze_offer_consistency(results, in.offers);
    std::vector<std::string> head{"offer"};
    for (int o : m.offers) head.push_back(std::to_string(o));
    std::string csv = csv_row(head);
    for (std::size_t a = 0; a < m.offers.size(); ++a) {
      std::vector<std::string> row{std::to_string(m.offers[a])};
      for (std::size_t b = 0; b < m.offers.size(); ++b) row.push_back(m.r[a][b] ? num(*m.r[a][b]) : "");
      csv += csv_row(row);
    }
    out.plots["consistency.csv"] = csv;
  } catch (const Error& e) {
    log_warning(std::string("consistency matrix skipped: ") + e.what());
  }

  std::string gender = "offer,mean_MrMr,mean_MrMs,mean_MsMr,mean_MsMs,gap,p_value\n";
  bool gender_ok = true;
  for (int o : in.offers) {
    try {
      const auto g = analyze_gender_gap(results, o);
      gender += csv_row({std::to_string(o), num(g.means.at(GenderPairing::MrMr)), num(g.means.at(GenderPairing::MrMs)),
                         num(g.means.at(GenderPairing::MsMr)), num(g.means.at(GenderPairing::MsMs)), num(g.gap),
                         num(g.p_value)});
    } catch (const Error& e) {
      log_warning(std::string("gender comparison skipped: ") + e.what());
      gender_ok = false;
      break;
    }
  }
  if (gender_ok) out.plots["gender_gap.csv"] = gender;
}

void report_gardenpath(const Inputs& in, const std::vector<std::optional<json>>& items, ReportFiles& out) {
  std::vector<GPResult> results;
  for (std::size_t i = 0; i < items.size(); ++i) {
    results.push_back({in.names[i / in.sentences.size()], in.sentences[i % in.sentences.size()],
                       items[i]->at("p")[1].get<double>(), items[i]->at("z").get<double>()});
  }
  const auto a = analyze_gp(results);
  out.summary = "kind,verb_class,mean_p_ungrammatical,sem,n_sentences\n";
  out.text = "Mean p(ungrammatical) by sentence type (SEM over sentences)\n\n";
  std::vector<std::string> labels;
  std::vector<double> values;
  char line[160];
  for (const auto& c : a.cells) {
    out.summary += csv_row({std::string(to_string(c.kind)), std::string(to_string(c.verb_class)), num(c.mean),
                            num(c.sem), std::to_string(c.n_sentences)});
    std::snprintf(line, sizeof line, "  %-12s %-4s %6.4f +/- %6.4f  (%zu sentences)\n",
                  std::string(to_string(c.kind)).c_str(), std::string(to_string(c.verb_class)).c_str(), c.mean,
                  c.sem, c.n_sentences);
    out.text += line;
    labels.push_back(std::string(to_string(c.kind)) + " " + std::string(to_string(c.verb_class)));
    values.push_back(c.mean);
  }
  out.text += "\nPairs with garden-path mean <= control mean: " + std::to_string(a.violating_pairs) + " of " +
              std::to_string(a.pairs.size()) + "\n";
  std::string pairs = "dataset,pair,verb_class,gp_mean,control_mean,violating\n";
  for (const auto& p : a.pairs) {
    pairs += csv_row({std::string(to_string(p.dataset)), std::to_string(p.pair), std::string(to_string(p.verb_class)),
                      num(p.gp_mean), num(p.control_mean), p.violating ? "true" : "false"});
  }
  out.plots["gp_cells.csv"] = out.summary;
  out.plots["gp_pairs.csv"] = pairs;
  out.plots["gp_cells.svg"] = svg::bar_chart("Mean p(ungrammatical)", "p(ungrammatical)", labels, values);
}

void report_milgram(const Inputs& in, const std::vector<std::optional<json>>& items, ReportFiles& out) {
  std::vector<MilgramOutcome> outcomes;
  for (const auto& it : items) outcomes.push_back(std::get<MilgramOutcome>(record_from_json(it->at("record")).outcome));
  const auto s = summarize_cohort(outcomes);
  const bool voltage = in.scenario->id == experiment::kMilgram;

  out.summary = "level,designation,count\n";
  for (const auto& r : s.rows()) out.summary += csv_row({std::to_string(r.level), r.designation, std::to_string(r.count)});

  std::string breakoff = "level,designation,count\n";
  std::string survival = "level,remaining\n";
  svg::Series series{"remaining", {}};
  for (int level = 0; level <= kMaxPunishments; ++level) {
    const std::string des = level == 0 ? "None" : std::string(level_designation(level));
    breakoff += csv_row({std::to_string(level), des, std::to_string(s.break_off[static_cast<std::size_t>(level)])});
    survival += csv_row({std::to_string(level), num(s.survival[static_cast<std::size_t>(level)])});
    series.points.emplace_back(level, s.survival[static_cast<std::size_t>(level)]);
  }
  out.plots["breakoff.csv"] = breakoff;
  out.plots["survival.csv"] = survival;
  out.plots["survival.svg"] = svg::line_chart("Subjects remaining by punishment level", "punishment level",
                                              "fraction remaining", {series});

  out.text = "Break-off points (n = " + std::to_string(s.n) + ")\n\n";
  out.text += voltage ? "  level  designation               volts  count\n" : "  level  designation               count\n";
  char line[160];
  for (int level = 0; level <= kMaxPunishments; ++level) {
    const int count = s.break_off[static_cast<std::size_t>(level)];
    const std::string des = level == 0 ? "None" : std::string(level_designation(level));
    const std::string c = count ? std::to_string(count) : "";
    if (voltage) {
      std::snprintf(line, sizeof line, "  %5d  %-24s %6d  %s\n", level, des.c_str(), 15 * level, c.c_str());
    } else {
      std::snprintf(line, sizeof line, "  %5d  %-24s %s\n", level, des.c_str(), c.c_str());
    }
    out.text += line;
  }
  out.text += "\nPercentage obedient subjects: " + format_fixed(s.percent_obedient, 1) + "%\n";
}

void report_crowd(const Inputs& in, const std::vector<std::optional<json>>& items, ReportFiles& out) {
  std::vector<CrowdCell> cells;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto text = items[i]->at("text").get<std::string>();
    cells.push_back({in.names[i / in.questions.size()], in.questions[i % in.questions.size()].id, parse_estimate(text),
                     text});
  }
  out.summary = "question_id,truth,n_total,n_valid,median,iqr,q1,q3,normalized_median,hyper_accurate\n";
  std::string normalized = "question_id,normalized_median,normalized_q1,normalized_q3\n";
  out.text = "Estimates by question\n\n  question                 truth        median           IQR   valid\n";
  std::vector<std::string> labels;
  std::vector<double> values;
  double y_max = 2.0;
  char line[200];
  for (const auto& q : in.questions) {
    try {
      const auto s = analyze_crowd(cells, {q}).front();
      out.summary += csv_row({s.question_id, std::to_string(s.truth), std::to_string(s.n_total),
                              std::to_string(s.n_valid), num(s.median), num(s.iqr), num(s.q1), num(s.q3),
                              num(s.normalized_median), s.hyper_accurate ? "true" : "false"});
      const double t = static_cast<double>(s.truth);
      normalized += csv_row({s.question_id, num(s.normalized_median), num(s.q1 / t), num(s.q3 / t)});
      std::snprintf(line, sizeof line, "  %-20s %12lld %13s %13s %4zu/%zu\n", s.question_id.c_str(),
                    static_cast<long long>(s.truth), num(s.median).c_str(), num(s.iqr).c_str(), s.n_valid,
                    s.n_total);
      labels.push_back(s.question_id);
      values.push_back(s.normalized_median);
      y_max = std::max(y_max, s.normalized_median);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoValidEstimates) throw;
      out.summary += csv_row({q.id, std::to_string(q.truth), "", "0", "", "", "", "", "", "false"});
      std::snprintf(line, sizeof line, "  %-20s %12lld %13s %13s\n", q.id.c_str(), static_cast<long long>(q.truth),
                    "-", "-");
    }
    out.text += line;
  }
  std::string by_title = "title,question_id,n_valid,median,iqr\n";
  for (const auto& [title, list] : analyze_crowd_by_title(cells, in.questions)) {
    for (const auto& s : list) {
      by_title += csv_row({std::string(to_string(title)), s.question_id, std::to_string(s.n_valid), num(s.median),
                           num(s.iqr)});
    }
  }
  out.plots["crowd_normalized.csv"] = normalized;
  out.plots["crowd_by_title.csv"] = by_title;
  out.plots["crowd_normalized.svg"] =
      svg::bar_chart("Median estimate / truth", "normalized median", labels, values, std::ceil(y_max));
}

void write_report(const fs::path& dir, const Inputs& in, const std::vector<std::optional<json>>& items) {
  ReportFiles files;
  if (in.experiment == experiment::kUltimatum) {
    report_ultimatum(in, items, files);
  } else if (in.experiment == experiment::kGardenPath) {
    report_gardenpath(in, items, files);
  } else if (in.experiment == experiment::kCrowd) {
    report_crowd(in, items, files);
  } else {
    report_milgram(in, items, files);
  }
  const auto rows = validity_rows(in, items);
  write_validity(dir, in.experiment, rows);
  std::string text = "Experiment: " + in.experiment + "\n\n" + files.text;
  if (!rows.empty()) {
    text += "\nValidity rate: " + format_fixed(100.0 * rows.front().mean, 1) + "% +/- " +
            format_fixed(100.0 * rows.front().sem, 3) + " (n = " + std::to_string(rows.front().n) + ")\n";
  }
  write_file(dir / "summary.csv", files.summary);
  write_file(dir / "report.txt", text);
  for (const auto& [name, content] : files.plots) write_file(dir / "plots" / name, content);
}

BackendPtr with_cache(const RunConfig& cfg, BackendPtr backend) {
  if (!cfg.cache_dir) return backend;
  fs::create_directories(*cfg.cache_dir);
  return cached(std::move(backend), *cfg.cache_dir / "cache.bin");
}

}  // namespace

BackendPtr make_backend(const RunConfig& cfg) { return make_backend_for(cfg, build_inputs(cfg)); }

CommandResult cmd_validate(const RunConfig& cfg, BackendPtr backend) {
  if (cfg.mode != RunMode::Validate) throw Error(ErrorCode::ConfigError, "cmd_validate needs validate mode");
  const Inputs in = build_inputs(cfg);
  if (!backend) backend = make_backend_for(cfg, in);
  const std::size_t n = in.n_items();
  FanOutOptions fo;
  fo.concurrency = cfg.concurrency;
  auto batch = fan_out<json>(n, fo, [&](std::size_t i) { return run_item(in, cfg, *backend, i); });

  const fs::path dir = cfg.output_dir / "validate";
  fs::create_directories(dir);
  write_validity(dir, cfg.experiment, validity_rows(in, batch.items));
  const std::size_t failed = batch.failures.size();
  write_file(dir / "manifest.json",
             manifest(cfg, backend->id(), failed ? "partial" : "complete", n, n - failed, failed).dump(2) + "\n");
  CommandResult res{failed ? kExitPartial : kExitOk, n, failed, ""};
  res.message = failed ? std::to_string(failed) + " of " + std::to_string(n) + " items failed; first: " +
                             batch.failures.front().message
                       : "validity report written to " + dir.string();
  return res;
}

CommandResult cmd_run(const RunConfig& cfg, BackendPtr backend) {
  if (cfg.mode != RunMode::Full) throw Error(ErrorCode::ConfigError, "cmd_run needs full mode");
  const Inputs in = build_inputs(cfg);
  if (!backend) backend = make_backend_for(cfg, in);
  backend = with_cache(cfg, std::move(backend));
  const std::size_t n = in.n_items();
  const fs::path& dir = cfg.output_dir;
  fs::create_directories(dir);

  const std::string fp = fingerprint(cfg);
  const fs::path ckpt = dir / "items.jsonl";
  auto items = load_checkpoint(ckpt, fp, n);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i) {
    if (!items[i]) pending.push_back(i);
  }

  {
    const bool fresh = !fs::exists(ckpt);
    std::ofstream out(ckpt, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::IoError, "cannot open checkpoint " + ckpt.string());
    if (fresh) out << checkpoint_header(fp) << std::flush;
    std::mutex mu;
    FanOutOptions fo;
    fo.concurrency = cfg.concurrency;
    auto batch = fan_out<json>(pending.size(), fo, [&](std::size_t k) {
      const std::size_t i = pending[k];
      json r = run_item(in, cfg, *backend, i);
      std::lock_guard lock(mu);
      out << json{{"i", i}, {"r", r}}.dump() << "\n" << std::flush;
      return r;
    });
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (batch.items[k]) items[pending[k]] = std::move(*batch.items[k]);
    }
    if (!batch.complete()) {
      const std::size_t failed = batch.failures.size();
      write_file(dir / "manifest.json",
                 manifest(cfg, backend->id(), "partial", n, n - failed, failed).dump(2) + "\n");
      return {kExitPartial, n, failed,
              std::to_string(failed) + " of " + std::to_string(n) + " items failed (" +
                  std::string(to_string(batch.failures.front().code)) + "); rerun to resume: " +
                  batch.failures.front().message};
    }
  }

  // Canonical checkpoint: header plus items in index order.
  std::string canon = checkpoint_header(fp);
  std::string records;
  std::string traces;
  for (std::size_t i = 0; i < n; ++i) {
    canon += json{{"i", i}, {"r", *items[i]}}.dump() + "\n";
    for (const auto& [rec, w] : item_records(in, i, *items[i])) {
      rec.validate();
      records += to_jsonl_line(rec, w) + "\n";
    }
    if (in.is_milgram()) traces += items[i]->dump() + "\n";
  }
  write_file(ckpt, canon);
  write_file(dir / "records.jsonl", records);
  write_file(dir / "results.csv", results_csv(in, items));
  if (in.is_milgram()) write_file(dir / "traces.jsonl", traces);
  write_report(dir, in, items);
  write_file(dir / "manifest.json", manifest(cfg, backend->id(), "complete", n, n, 0).dump(2) + "\n");
  return {kExitOk, n, 0, "run complete: " + std::to_string(n) + " items in " + dir.string()};
}

CommandResult cmd_report(const fs::path& output_dir) {
  const fs::path mpath = output_dir / "manifest.json";
  if (!fs::exists(mpath)) throw Error(ErrorCode::MissingRun, "no run manifest in " + output_dir.string());
  json m;
  try {
    m = json::parse(read_file(mpath));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MissingRun, "unreadable manifest: " + std::string(e.what()));
  }
  if (m.value("mode", "") != "full" || m.value("status", "") != "complete") {
    throw Error(ErrorCode::MissingRun, "no completed run in " + output_dir.string());
  }
  FlatConfig flat;
  for (const auto& [k, v] : m.at("config").items()) flat.set(k, v.get<std::string>());
  RunConfig cfg = RunConfig::from(flat, RunMode::Full);
  cfg.output_dir = output_dir;
  const Inputs in = build_inputs(cfg);
  const std::size_t n = in.n_items();
  auto items = load_checkpoint(output_dir / "items.jsonl", fingerprint(cfg), n);
  for (const auto& it : items) {
    if (!it) throw Error(ErrorCode::MissingRun, "run checkpoint in " + output_dir.string() + " is incomplete");
  }
  write_report(output_dir, in, items);
  return {kExitOk, n, 0, "report written to " + output_dir.string()};
}

std::vector<std::string> validate_output_violations(const fs::path& dir) {
  std::vector<std::string> v;
  static const std::set<std::string> kFiles = {"validity.csv", "validity.txt", "manifest.json"};
  if (!fs::is_directory(dir)) return {"missing directory " + dir.string()};
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (!e.is_regular_file() || !kFiles.count(rel)) v.push_back("unexpected entry " + rel);
  }
  for (const auto& f : kFiles) {
    if (!fs::exists(dir / f)) v.push_back("missing " + f);
  }
  if (fs::exists(dir / "validity.csv")) {
    const auto lines = split(read_file(dir / "validity.csv"), '\n');
    if (lines.empty() || lines[0] != kValidityHeader) v.push_back("validity.csv header differs from the schema");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto f = split(lines[i], ',');
      if (f.size() != 5) {
        v.push_back("validity.csv line " + std::to_string(i + 1) + " has " + std::to_string(f.size()) + " fields");
        continue;
      }
      try {
        std::stoul(f[2]);
        std::stod(f[3]);
        std::stod(f[4]);
      } catch (const std::exception&) {
        v.push_back("validity.csv line " + std::to_string(i + 1) + " has non-numeric values");
      }
    }
  }
  if (fs::exists(dir / "manifest.json")) {
    try {
      const auto m = json::parse(read_file(dir / "manifest.json"));
      for (const auto& [k, val] : m.items()) {
        if (!manifest_keys().count(k)) v.push_back("manifest key " + k + " outside the schema");
      }
      if (m.value("mode", "") != "validate") v.push_back("manifest mode is not validate");
    } catch (const json::exception&) {
      v.push_back("manifest.json is not valid JSON");
    }
  }
  return v;
}

}  // namespace te
