#include <cmath>

#include "doctest.h"
#include "te/error.hpp"
#include "te/lm_port.hpp"
#include "te/util.hpp"

using namespace te;
using nlohmann::json;

TEST_CASE("leading-space rule") {
  CHECK(scoring_continuation("decides to", "accept") == " accept");
  CHECK(scoring_continuation("decides to ", "accept") == "accept");
  CHECK(scoring_continuation("decides to", " accept") == " accept");
  CHECK(scoring_continuation("", "accept") == "accept");
  // Idempotent once applied.
  const auto once = scoring_continuation("x", "y");
  CHECK(scoring_continuation("x", once) == once);
}

TEST_CASE("stop sequences truncate at the earliest match") {
  std::string t = "abc\n\ndef]ghi";
  CHECK(apply_stop_sequences(t, {"]", "\n\n"}));
  CHECK(t == "abc");
  std::string u = "no stop";
  CHECK_FALSE(apply_stop_sequences(u, {"]"}));
  CHECK(u == "no stop");
}

TEST_CASE("scripted completion table") {
  const auto b = ScriptedBackend::from_json(json::parse(R"({
    "id": "t",
    "completions": [
      {"prompt": "ping", "text": "pong"},
      {"prompt": "draw", "samples": [{"text": "x", "weight": 1}, {"text": "y", "weight": 3}]},
      {"prompt": "tail", "match": "suffix", "text": "end]rest"}
    ]})"));
  CHECK(b->complete("ping", {}, 1).text == "pong");
  CHECK(b->complete("ping", {}, 1) == b->complete("ping", {}, 1));
  SamplingParams p;
  p.stop_sequences = {"]"};
  CHECK(b->complete("at the tail", p, 0).text == "end");
  int y = 0;
  for (std::uint64_t s = 0; s < 4000; ++s) y += b->complete("draw", {}, s).text == "y";
  CHECK(std::abs(y - 3000) <= 3 * std::sqrt(4000 * 0.75 * 0.25));
  CHECK_THROWS_WITH_AS(b->complete("unknown", {}, 0), doctest::Contains("ScriptMiss"), Error);
}

TEST_CASE("scripted scores") {
  const auto b = ScriptedBackend::from_json(json::parse(R"({
    "scores": [
      {"prompt": "s", "tokens": [[" acc", -1.0], ["ept", -0.5]]},
      {"prompt": "coin", "continuation": "heads", "mass": 0.5},
      {"prompt": "coin", "continuation": "tails", "mass": 0.5},
      {"prompt": "q", "continuation": "yes", "mass": 0.30},
      {"prompt": "q", "continuation": "no", "mass": 0.10}
    ]})"));
  CHECK(b->score("s", "accept") == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(b->score("coin", "heads") == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(b->score("", "heads"), doctest::Contains("InvalidArgument"), Error);
  CHECK(std::abs(b->score("q", "yes") - std::log(0.30)) < 1e-12);
  CHECK(std::abs(b->score("q", "no") - std::log(0.10)) < 1e-12);
  CHECK(b->score("q", "maybe") == kNegInf);
  CHECK_THROWS_WITH_AS(b->score("s", "ac"), doctest::Contains("TokenizationMismatch"), Error);
}

TEST_CASE("property: scripted score is monotone and matches declared mass") {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    json tokens = json::array();
    std::string cont;
    std::vector<std::pair<std::string, double>> prefixes;
    double sum = 0.0;
    const auto n = 1 + rng.below(6);
    for (std::uint64_t k = 0; k < n; ++k) {
      std::string tok = (k == 0 ? " " : "") + std::string(1, static_cast<char>('a' + rng.below(26))) +
                        std::string(rng.below(3), 'z');
      const double lp = -rng.uniform01() * 3.0;
      tokens.push_back({tok, lp});
      cont += tok;
      sum += lp;
      prefixes.emplace_back(cont, sum);
    }
    const auto b = ScriptedBackend::from_json(json{{"scores", json::array({json{{"prompt", "p"}, {"tokens", tokens}}})}});
    double previous = 0.0;
    for (const auto& [prefix, declared] : prefixes) {
      const double s = b->score("p", prefix);
      CHECK(s <= previous);
      CHECK(std::abs(std::exp(s) - std::exp(declared)) < 1e-12);
      previous = s;
    }
    CHECK(b->score("p", cont + "zz") == kNegInf);
  }
}

TEST_CASE("capabilities are enforced") {
  const auto b = ScriptedBackend::from_json(
      json::parse(R"({"can_score": false, "max_prompt_chars": 5, "completions": [{"prompt": "abc", "text": "d"}]})"));
  CHECK_THROWS_WITH_AS(b->score("abc", "d"), doctest::Contains("CapabilityMissing"), Error);
  CHECK_THROWS_WITH_AS(b->complete("abcdef", {}, 0), doctest::Contains("PromptTooLong"), Error);
  CHECK(b->complete("abc", {}, 0).text == "d");
}

TEST_CASE("policy backend scores by prefix mass and samples by mass") {
  const PolicyBackend b("p", [](const std::string&) {
    return std::vector<PolicyOption>{{" accept it.", 0.3}, {" accept later.", 0.1}, {" reject.", 0.4}};
  });
  CHECK(std::abs(std::exp(b.score("x", "accept")) - 0.4) < 1e-12);
  CHECK(std::abs(std::exp(b.score("x", "reject")) - 0.4) < 1e-12);
  // Remaining 0.2 goes to the fallback text.
  CHECK(std::abs(std::exp(b.score("x", "...")) - 0.2) < 1e-12);
  CHECK(b.score("x", "maybe") == kNegInf);
  int accepts = 0;
  const int n = 20000;
  for (int s = 0; s < n; ++s) accepts += b.complete("x", {}, static_cast<std::uint64_t>(s)).text.starts_with(" accept");
  CHECK(std::abs(accepts / double(n) - 0.4) <= 3 * std::sqrt(0.24 / n));
  CHECK(b.complete("x", {}, 5) == b.complete("x", {}, 5));
}

TEST_CASE("completion json round trip") {
  Completion c{"hi", FinishReason::Length, std::vector<TokenScore>{{"h", -0.1}, {"i", -0.2}}};
  CHECK(completion_from_json(to_json(c)) == c);
  Completion d{"x", FinishReason::Stop, std::nullopt};
  CHECK(completion_from_json(to_json(d)) == d);
}
