#pragma once

#include <chrono>
#include <mutex>
#include <string>

#include "te/lm_port.hpp"

namespace te {

/// Blocking token bucket: `rate_per_minute` tokens refill continuously up to
/// `burst`. Thread-safe.
class TokenBucket {
 public:
  explicit TokenBucket(double rate_per_minute, double burst = 1.0);

  /// Blocks until one token is available, then consumes it.
  void acquire();
  /// Consumes a token if one is available now.
  bool try_acquire();

 private:
  void refill(std::chrono::steady_clock::time_point now);

  std::mutex mu_;
  double rate_per_sec_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct HttpBackendConfig {
  /// e.g. "https://api.openai.com/v1"; requests go to {base_url}/completions.
  std::string base_url;
  std::string model;
  /// Empty: read from the TE_API_KEY environment variable.
  std::string api_key;
  double requests_per_minute = 60.0;
  double burst = 1.0;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};
  std::size_t max_prompt_chars = 16'000;
  bool can_score = true;
  /// max_tokens sent with echo requests used for scoring.
  int score_max_tokens = 0;
};

/// OpenAI-compatible completions client. Transient failures (connection
/// errors, 429, 5xx) are retried with exponential backoff.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override;
  BackendCapabilities capabilities() const override;

 protected:
  Completion do_complete(const std::string& prompt, const SamplingParams& params, std::uint64_t seed) const override;
  double do_score(const std::string& prompt, const std::string& continuation) const override;

 private:
  nlohmann::json post(const nlohmann::json& body) const;

  HttpBackendConfig config_;
  std::string host_;         // scheme://host[:port]
  std::string path_prefix_;  // e.g. /v1
  mutable TokenBucket bucket_;
};

/// Sum of logprobs of the tokens covering text[begin, end). The tokens must
/// concatenate to a string starting with `text`, and both offsets must fall on
/// token boundaries (TokenizationMismatch otherwise).
double sum_span_logprobs(const std::vector<std::string>& tokens, const std::vector<std::optional<double>>& logprobs,
                         std::string_view text, std::size_t begin, std::size_t end);

}  // namespace te
