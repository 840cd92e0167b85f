#include "te/lm_port.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

using nlohmann::json;

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Other: return "other";
  }
  return "other";
}

FinishReason parse_finish_reason(std::string_view s) {
  if (s == "stop") return FinishReason::Stop;
  if (s == "length") return FinishReason::Length;
  return FinishReason::Other;
}

json to_json(const Completion& c) {
  json j{{"text", c.text}, {"finish_reason", to_string(c.finish_reason)}};
  if (c.token_scores) {
    json toks = json::array();
    for (const auto& t : *c.token_scores) toks.push_back(json::array({t.token, t.logprob}));
    j["token_scores"] = std::move(toks);
  }
  return j;
}

Completion completion_from_json(const json& j) {
  Completion c;
  c.text = j.at("text").get<std::string>();
  c.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
  if (j.contains("token_scores")) {
    std::vector<TokenScore> toks;
    for (const auto& t : j.at("token_scores")) toks.push_back({t.at(0).get<std::string>(), t.at(1).get<double>()});
    c.token_scores = std::move(toks);
  }
  return c;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool matches(MatchMode mode, std::string_view pattern, std::string_view prompt) {
  switch (mode) {
    case MatchMode::Exact: return prompt == pattern;
    case MatchMode::Suffix: return prompt.ends_with(pattern);
    case MatchMode::Contains: return prompt.find(pattern) != std::string_view::npos;
  }
  return false;
}

MatchMode parse_match_mode(std::string_view s) {
  if (s == "exact") return MatchMode::Exact;
  if (s == "suffix") return MatchMode::Suffix;
  if (s == "contains") return MatchMode::Contains;
  throw Error(ErrorCode::InvalidArgument, "unknown match mode '" + std::string(s) + "'");
}

std::size_t draw_index(const std::vector<double>& weights, double total, std::uint64_t seed) {
  const double u = Rng(seed).uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size();
}

}  // namespace

std::string scoring_continuation(std::string_view prompt, std::string_view continuation) {
  std::string out;
  if (!prompt.empty() && !is_space(prompt.back()) && !continuation.empty() && !is_space(continuation.front())) {
    out.push_back(' ');
  }
  out.append(continuation);
  return out;
}

bool apply_stop_sequences(std::string& text, const std::vector<std::string>& stops) {
  std::size_t cut = std::string::npos;
  for (const auto& s : stops) {
    if (s.empty()) continue;
    const auto pos = text.find(s);
    if (pos != std::string::npos && pos < cut) cut = pos;
  }
  if (cut == std::string::npos) return false;
  text.resize(cut);
  return true;
}

void Backend::check_prompt(const std::string& prompt) const {
  if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  const auto limit = capabilities().max_prompt_chars;
  if (prompt.size() > limit) {
    throw Error(ErrorCode::PromptTooLong,
                std::to_string(prompt.size()) + " chars exceeds limit " + std::to_string(limit));
  }
}

Completion Backend::complete(const std::string& prompt, const SamplingParams& params, std::uint64_t seed) const {
  check_prompt(prompt);
  params.validate();
  return do_complete(prompt, params, seed);
}

double Backend::score(const std::string& prompt, const std::string& continuation) const {
  if (!capabilities().can_score_continuations) {
    throw Error(ErrorCode::CapabilityMissing, "backend '" + id() + "' cannot score continuations");
  }
  if (continuation.empty()) throw Error(ErrorCode::InvalidArgument, "empty continuation");
  check_prompt(prompt);
  const double lp = do_score(prompt, scoring_continuation(prompt, continuation));
  if (std::isnan(lp) || lp > 0.0) {
    throw Error(ErrorCode::MalformedResponse, "log-probability out of range: " + format_double(lp));
  }
  return lp;
}

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(std::string id, std::vector<CompletionRule> completions,
                                 std::vector<ScoreRule> scores, BackendCapabilities caps)
    : id_(std::move(id)), completions_(std::move(completions)), scores_(std::move(scores)), caps_(caps) {
  for (const auto& r : completions_) {
    if (r.samples.empty()) throw Error(ErrorCode::InvalidArgument, "completion rule without text");
    for (const auto& s : r.samples) {
      if (!(s.weight >= 0.0)) throw Error(ErrorCode::NegativeWeight, "completion sample weight");
    }
  }
  for (const auto& r : scores_) {
    if (r.tokens.empty()) throw Error(ErrorCode::InvalidArgument, "score rule without tokens");
    for (const auto& t : r.tokens) {
      if (t.token.empty()) throw Error(ErrorCode::InvalidArgument, "empty scripted token");
      if (t.logprob > 0.0 || std::isnan(t.logprob)) {
        throw Error(ErrorCode::InvalidArgument, "scripted logprob must be <= 0");
      }
    }
  }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& j) {
  try {
    BackendCapabilities caps;
    caps.can_score_continuations = j.value("can_score", true);
    caps.max_prompt_chars = j.value("max_prompt_chars", caps.max_prompt_chars);

    std::vector<CompletionRule> completions;
    for (const auto& r : j.value("completions", json::array())) {
      CompletionRule rule;
      rule.prompt = r.at("prompt").get<std::string>();
      rule.match = parse_match_mode(r.value("match", "exact"));
      rule.finish_reason = parse_finish_reason(r.value("finish_reason", "stop"));
      if (r.contains("samples")) {
        for (const auto& s : r.at("samples")) {
          rule.samples.push_back({s.at("text").get<std::string>(), s.value("weight", 1.0)});
        }
      } else {
        rule.samples.push_back({r.at("text").get<std::string>(), 1.0});
      }
      completions.push_back(std::move(rule));
    }

    std::vector<ScoreRule> scores;
    for (const auto& r : j.value("scores", json::array())) {
      ScoreRule rule;
      rule.prompt = r.at("prompt").get<std::string>();
      rule.match = parse_match_mode(r.value("match", "exact"));
      if (r.contains("tokens")) {
        for (const auto& t : r.at("tokens")) rule.tokens.push_back({t.at(0).get<std::string>(), t.at(1).get<double>()});
      } else {
        // A single-token continuation with a declared mass. The continuation
        // follows the leading-space rule against the rule's prompt unless the
        // prompt is only a substring pattern.
        auto cont = r.at("continuation").get<std::string>();
        if (rule.match != MatchMode::Contains) cont = scoring_continuation(rule.prompt, cont);
        const double mass = r.at("mass").get<double>();
        if (mass < 0.0 || mass > 1.0) throw Error(ErrorCode::InvalidArgument, "scripted mass outside [0, 1]");
        rule.tokens.push_back({cont, std::log(mass)});
      }
      scores.push_back(std::move(rule));
    }
    return std::make_shared<ScriptedBackend>(j.value("id", "scripted"), std::move(completions), std::move(scores),
                                             caps);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed script: ") + e.what());
  }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open script " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "script " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

Completion ScriptedBackend::do_complete(const std::string& prompt, const SamplingParams& params,
                                        std::uint64_t seed) const {
  calls_.fetch_add(1);
  for (const auto& rule : completions_) {
    if (!matches(rule.match, rule.prompt, prompt)) continue;
    std::size_t idx = 0;
    if (rule.samples.size() > 1) {
      std::vector<double> w;
      double total = 0.0;
      for (const auto& s : rule.samples) {
        w.push_back(s.weight);
        total += s.weight;
      }
      if (!(total > 0.0)) throw Error(ErrorCode::AllZero, "completion rule weights");
      idx = std::min(draw_index(w, total, derive_seed(seed, fnv1a(prompt))), w.size() - 1);
    }
    Completion c{rule.samples[idx].text, rule.finish_reason, std::nullopt};
    if (apply_stop_sequences(c.text, params.stop_sequences)) c.finish_reason = FinishReason::Stop;
    return c;
  }
  throw Error(ErrorCode::ScriptMiss, "no scripted completion for prompt ending '" +
                                         prompt.substr(prompt.size() > 60 ? prompt.size() - 60 : 0) + "'");
}

double ScriptedBackend::do_score(const std::string& prompt, const std::string& continuation) const {
  calls_.fetch_add(1);
  for (const auto& rule : scores_) {
    if (!matches(rule.match, rule.prompt, prompt)) continue;
    std::string joined;
    double sum = 0.0;
    for (const auto& t : rule.tokens) {
      const std::size_t before = joined.size();
      joined += t.token;
      if (!std::string_view(joined).starts_with(
              std::string_view(continuation).substr(0, std::min(joined.size(), continuation.size())))) {
        break;
      }
      sum += t.logprob;
      if (joined.size() == continuation.size()) return sum;
      if (joined.size() > continuation.size()) {
        throw Error(ErrorCode::TokenizationMismatch, "continuation '" + continuation + "' ends inside token '" +
                                                         t.token + "' at offset " + std::to_string(before));
      }
    }
  }
  return kNegInf;
}

// ---------------------------------------------------------------------------
// PolicyBackend

PolicyBackend::PolicyBackend(std::string id, PolicyFn policy, std::string fallback_text, BackendCapabilities caps)
    : id_(std::move(id)), policy_(std::move(policy)), fallback_(std::move(fallback_text)), caps_(caps) {
  if (!policy_) throw Error(ErrorCode::InvalidArgument, "empty policy");
}

std::vector<PolicyOption> PolicyBackend::options_for(const std::string& prompt) const {
  auto options = policy_(prompt);
  double total = 0.0;
  for (const auto& o : options) {
    if (!(o.mass >= 0.0)) throw Error(ErrorCode::NegativeWeight, "policy option mass");
    total += o.mass;
  }
  if (total > 1.0 + 1e-9) throw Error(ErrorCode::UnnormalizedWeights, "policy masses sum above 1");
  return options;
}

Completion PolicyBackend::do_complete(const std::string& prompt, const SamplingParams& params,
                                      std::uint64_t seed) const {
  calls_.fetch_add(1);
  const auto options = options_for(prompt);
  std::vector<double> w;
  for (const auto& o : options) w.push_back(o.mass);
  const std::size_t idx = draw_index(w, 1.0, derive_seed(seed, fnv1a(prompt)));
  Completion c{idx < options.size() ? options[idx].text : fallback_, FinishReason::Stop, std::nullopt};
  apply_stop_sequences(c.text, params.stop_sequences);
  return c;
}

double PolicyBackend::do_score(const std::string& prompt, const std::string& continuation) const {
  calls_.fetch_add(1);
  const auto options = options_for(prompt);
  double mass = 0.0;
  double total = 0.0;
  for (const auto& o : options) {
    total += o.mass;
    if (std::string_view(o.text).starts_with(continuation)) mass += o.mass;
  }
  if (std::string_view(fallback_).starts_with(continuation)) mass += std::max(0.0, 1.0 - total);
  return mass > 0.0 ? std::min(0.0, std::log(mass)) : kNegInf;
}

}  // namespace te
