#include "te/http_backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

using nlohmann::json;

TokenBucket::TokenBucket(double rate_per_minute, double burst)
    : rate_per_sec_(rate_per_minute / 60.0), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)),
      last_(std::chrono::steady_clock::now()) {
  if (!(rate_per_minute > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate limit must be positive");
}

void TokenBucket::refill(std::chrono::steady_clock::time_point now) {
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_per_sec_);
  last_ = now;
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mu_);
  refill(std::chrono::steady_clock::now());
  if (tokens_ < 1.0) return false;
  tokens_ -= 1.0;
  return true;
}

void TokenBucket::acquire() {
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mu_);
      refill(std::chrono::steady_clock::now());
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_);
    }
    std::this_thread::sleep_for(wait);
  }
}

namespace {

/// Splits "https://host:port/v1" into ("https://host:port", "/v1").
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::MalformedResponse, std::string("response lacks '") + key + "'");
  }
  return j.at(key);
}

const json& first_choice(const json& response) {
  const auto& choices = require(response, "choices");
  if (!choices.is_array() || choices.empty()) throw Error(ErrorCode::MalformedResponse, "empty choices");
  return choices.front();
}

struct TokenList {
  std::vector<std::string> tokens;
  std::vector<std::optional<double>> logprobs;
};

std::optional<TokenList> read_tokens(const json& choice) {
  if (!choice.contains("logprobs") || choice.at("logprobs").is_null()) return std::nullopt;
  const auto& lp = choice.at("logprobs");
  const auto& toks = require(lp, "tokens");
  const auto& vals = require(lp, "token_logprobs");
  if (!toks.is_array() || !vals.is_array() || toks.size() != vals.size()) {
    throw Error(ErrorCode::MalformedResponse, "tokens and token_logprobs differ in length");
  }
  TokenList out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!toks[i].is_string()) throw Error(ErrorCode::MalformedResponse, "non-string token");
    out.tokens.push_back(toks[i].get<std::string>());
    if (vals[i].is_null()) {
      out.logprobs.push_back(std::nullopt);
    } else if (vals[i].is_number()) {
      out.logprobs.push_back(vals[i].get<double>());
    } else {
      throw Error(ErrorCode::MalformedResponse, "non-numeric token logprob");
    }
  }
  return out;
}

}  // namespace

double sum_span_logprobs(const std::vector<std::string>& tokens, const std::vector<std::optional<double>>& logprobs,
                         std::string_view text, std::size_t begin, std::size_t end) {
  if (tokens.size() != logprobs.size()) throw Error(ErrorCode::MalformedResponse, "token/logprob length mismatch");
  if (begin > end || end > text.size()) throw Error(ErrorCode::InvalidArgument, "span outside text");
  std::size_t off = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size() && off < end; ++i) {
    const std::size_t start = off;
    const std::string& tok = tokens[i];
    off += tok.size();
    if (text.substr(start, tok.size()) != std::string_view(tok).substr(0, std::min(tok.size(), text.size() - start))) {
      throw Error(ErrorCode::MalformedResponse, "echoed tokens do not reproduce the prompt");
    }
    if (start < begin && off > begin) {
      throw Error(ErrorCode::TokenizationMismatch, "a token straddles the prompt/continuation boundary");
    }
    if (start >= begin) {
      if (off > end) throw Error(ErrorCode::TokenizationMismatch, "continuation ends inside a token");
      if (!logprobs[i]) throw Error(ErrorCode::MalformedResponse, "missing logprob for continuation token");
      sum += *logprobs[i];
    }
  }
  if (off < end) throw Error(ErrorCode::MalformedResponse, "echoed tokens do not cover the continuation");
  return sum;
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), bucket_(config_.requests_per_minute, config_.burst) {
  std::tie(host_, path_prefix_) = split_base_url(config_.base_url);
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("TE_API_KEY")) config_.api_key = key;
  }
  if (config_.max_attempts < 1) throw Error(ErrorCode::ConfigError, "max_attempts must be >= 1");
}

std::string HttpBackend::id() const { return "http:" + config_.model + "@" + config_.base_url; }

BackendCapabilities HttpBackend::capabilities() const {
  return {config_.can_score, config_.max_prompt_chars};
}

json HttpBackend::post(const json& body) const {
  const std::string path = path_prefix_ + "/completions";
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    bucket_.acquire();
    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::BackendUnavailable,
                  "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedResponse, std::string("invalid JSON body: ") + e.what());
    }
  }
  throw Error(ErrorCode::BackendUnavailable,
              "giving up after " + std::to_string(config_.max_attempts) + " attempts (" + last_error + ")");
}

Completion HttpBackend::do_complete(const std::string& prompt, const SamplingParams& params,
                                    std::uint64_t seed) const {
  json body{{"model", config_.model},
            {"prompt", prompt},
            {"temperature", params.temperature},
            {"top_p", params.top_p},
            {"max_tokens", params.max_tokens},
            {"logprobs", 0},
            {"echo", false},
            {"seed", seed & 0x7fffffffffffffffULL}};
  if (!params.stop_sequences.empty()) body["stop"] = params.stop_sequences;
  const json response = post(body);
  const auto& choice = first_choice(response);
  const auto& text = require(choice, "text");
  if (!text.is_string()) throw Error(ErrorCode::MalformedResponse, "choice text is not a string");

  Completion c;
  c.text = text.get<std::string>();
  const auto reason = choice.value("finish_reason", json(nullptr));
  c.finish_reason = reason.is_string() ? parse_finish_reason(reason.get<std::string>()) : FinishReason::Other;
  if (auto toks = read_tokens(choice)) {
    std::string joined;
    std::vector<TokenScore> scores;
    bool complete = true;
    for (std::size_t i = 0; i < toks->tokens.size(); ++i) {
      joined += toks->tokens[i];
      if (!toks->logprobs[i]) complete = false;
      scores.push_back({toks->tokens[i], toks->logprobs[i].value_or(0.0)});
    }
    // Dropped rather than reported when they would break the concatenation invariant.
    if (complete && joined == c.text) c.token_scores = std::move(scores);
  }
  return c;
}

double HttpBackend::do_score(const std::string& prompt, const std::string& continuation) const {
  const std::string full = prompt + continuation;
  json body{{"model", config_.model}, {"prompt", full},         {"temperature", 1.0},
            {"top_p", 1.0},           {"max_tokens", config_.score_max_tokens}, {"logprobs", 0},
            {"echo", true}};
  const json response = post(body);
  const auto toks = read_tokens(first_choice(response));
  if (!toks) throw Error(ErrorCode::MalformedResponse, "echo response lacks logprobs");
  return sum_span_logprobs(toks->tokens, toks->logprobs, full, prompt.size(), full.size());
}

}  // namespace te
