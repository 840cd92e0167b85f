#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "te/error.hpp"
#include "te/http_backend.hpp"

using namespace te;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(TE_FIXTURE_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Local OpenAI-compatible stand-in. Echo requests tokenize the prompt on
// spaces and assign each token logprob -0.25.
class FixtureServer {
 public:
  FixtureServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++requests_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = json::parse(req.body);
      if (n <= fail_first_) {
        res.status = 503;
        return;
      }
      if (mode_ == "bad_request") {
        res.status = 400;
        res.set_content("{\"error\": \"bad\"}", "application/json");
        return;
      }
      if (mode_ == "garbage") {
        res.set_content("not json", "text/plain");
        return;
      }
      if (last_body_.value("echo", false)) {
        const std::string prompt = last_body_.at("prompt");
        json tokens = json::array(), lps = json::array();
        std::size_t start = 0;
        for (std::size_t i = 1; i <= prompt.size(); ++i) {
          if (i == prompt.size() || prompt[i] == ' ') {
            tokens.push_back(prompt.substr(start, i - start));
            lps.push_back(start == 0 ? json(nullptr) : json(-0.25));
            start = i;
          }
        }
        json choice{{"text", prompt}, {"index", 0}, {"finish_reason", "length"},
                    {"logprobs", {{"tokens", tokens}, {"token_logprobs", lps}}}};
        res.set_content(json{{"choices", json::array({choice})}}.dump(), "application/json");
        return;
      }
      res.set_content(fixture("completion_response.json"), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FixtureServer() {
    server_.stop();
    thread_.join();
  }

  HttpBackendConfig config() const {
    HttpBackendConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "fixture-model";
    c.api_key = "test-key";
    c.requests_per_minute = 60000;
    c.burst = 100;
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(5);
    return c;
  }

  std::atomic<int> requests_{0};
  int fail_first_ = 0;
  std::string mode_;
  std::string last_auth_;
  json last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("http completion replays the recorded exchange") {
  FixtureServer server;
  HttpBackend b(server.config());
  SamplingParams p;
  p.max_tokens = 8;
  p.stop_sequences = {"\n"};
  const auto c = b.complete("In the following scenario ...", p, 9);
  CHECK(c.text == " accept the offer.");
  CHECK(c.finish_reason == FinishReason::Stop);
  REQUIRE(c.token_scores.has_value());
  CHECK(c.token_scores->size() == 4);
  CHECK(server.last_auth_ == "Bearer test-key");
  CHECK(server.last_body_.at("model") == "fixture-model");
  CHECK(server.last_body_.at("max_tokens") == 8);
  CHECK(server.last_body_.at("stop") == json::array({"\n"}));
  CHECK(server.last_body_.at("seed") == 9);
}

TEST_CASE("http scoring sums continuation token logprobs from an echo") {
  FixtureServer server;
  HttpBackend b(server.config());
  CHECK(b.score("Answer: he decides to", "accept the offer") == doctest::Approx(-0.75));
  CHECK(server.last_body_.at("echo") == true);
  CHECK(server.last_body_.at("prompt") == "Answer: he decides to accept the offer");
}

TEST_CASE("http retries transient failures then succeeds") {
  FixtureServer server;
  server.fail_first_ = 2;
  HttpBackend b(server.config());
  CHECK(b.complete("x", {}, 0).text == " accept the offer.");
  CHECK(server.requests_ == 3);
}

TEST_CASE("http gives up after max attempts") {
  FixtureServer server;
  server.fail_first_ = 100;
  auto cfg = server.config();
  cfg.max_attempts = 3;
  HttpBackend b(cfg);
  CHECK_THROWS_WITH_AS(b.complete("x", {}, 0), doctest::Contains("BackendUnavailable"), Error);
  CHECK(server.requests_ == 3);
}

TEST_CASE("http client errors are not retried") {
  FixtureServer server;
  server.mode_ = "bad_request";
  HttpBackend b(server.config());
  CHECK_THROWS_WITH_AS(b.complete("x", {}, 0), doctest::Contains("BackendUnavailable"), Error);
  CHECK(server.requests_ == 1);
}

TEST_CASE("http malformed body") {
  FixtureServer server;
  server.mode_ = "garbage";
  HttpBackend b(server.config());
  CHECK_THROWS_WITH_AS(b.complete("x", {}, 0), doctest::Contains("MalformedResponse"), Error);
}

TEST_CASE("http unreachable endpoint is unavailable") {
  HttpBackendConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.model = "m";
  c.max_attempts = 2;
  c.initial_backoff = std::chrono::milliseconds(1);
  c.timeout = std::chrono::seconds(1);
  c.requests_per_minute = 60000;
  HttpBackend b(c);
  CHECK_THROWS_WITH_AS(b.complete("x", {}, 0), doctest::Contains("BackendUnavailable"), Error);
}

TEST_CASE("echo span summation") {
  const std::vector<std::string> toks{"He", " said", " yes"};
  const std::vector<std::optional<double>> lps{std::nullopt, -1.0, -2.0};
  CHECK(sum_span_logprobs(toks, lps, "He said yes", 7, 11) == -2.0);
  CHECK(sum_span_logprobs(toks, lps, "He said yes", 2, 11) == -3.0);
  CHECK_THROWS_WITH_AS(sum_span_logprobs(toks, lps, "He said yes", 5, 11), doctest::Contains("TokenizationMismatch"),
                       Error);
}

TEST_CASE("token bucket paces requests") {
  TokenBucket bucket(600.0, 1.0);  // one token per 100 ms
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) bucket.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= std::chrono::milliseconds(280));
  CHECK_FALSE(bucket.try_acquire());
}
