#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "te/cache.hpp"
#include "te/error.hpp"
#include "te/lm_port.hpp"
#include "te/util.hpp"

using namespace te;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "te_cache_tests";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

std::shared_ptr<ScriptedBackend> mock() {
  return ScriptedBackend::from_json(json::parse(R"({
    "completions": [{"prompt": "ping", "samples": [{"text": "a"}, {"text": "b"}, {"text": "c"}]}],
    "scores": [{"prompt": "q", "continuation": "yes", "mass": 0.3}]})"));
}

}  // namespace

TEST_CASE("cache serves repeated calls without the backend") {
  const auto path = fresh_path("hit.bin");
  const auto inner = mock();
  const auto c = cached(inner, path);
  const auto first = c->complete("ping", {}, 1);
  CHECK(inner->calls() == 1);
  CHECK(c->complete("ping", {}, 1) == first);
  CHECK(inner->calls() == 1);
  CHECK(c->hits() == 1);
  CHECK(c->misses() == 1);
  c->complete("ping", {}, 2);
  CHECK(inner->calls() == 2);
  SamplingParams other;
  other.max_tokens = 3;
  c->complete("ping", other, 1);
  CHECK(inner->calls() == 3);
  CHECK(std::abs(c->score("q", "yes") - std::log(0.3)) < 1e-12);
  CHECK(c->score("q", "yes") == inner->score("q", "yes"));
  CHECK(inner->calls() == 5);
  CHECK(c->score("q", "no") == kNegInf);
  CHECK(c->score("q", "no") == kNegInf);
}

TEST_CASE("cache persists across instances") {
  const auto path = fresh_path("persist.bin");
  const auto inner = mock();
  Completion first;
  {
    const auto c = cached(inner, path);
    first = c->complete("ping", {}, 3);
    c->score("q", "yes");
  }
  const auto again = cached(inner, path);
  CHECK(again->size() == 2);
  CHECK(again->complete("ping", {}, 3) == first);
  CHECK(inner->calls() == 2);
}

TEST_CASE("property: cache is transparent for deterministic backends") {
  const auto path = fresh_path("transparent.bin");
  const auto inner = mock();
  const auto c = cached(inner, path);
  for (std::uint64_t s = 0; s < 200; ++s) {
    CHECK(c->complete("ping", {}, s % 50) == inner->complete("ping", {}, s % 50));
  }
}

TEST_CASE("corrupted entry is recomputed and rewritten") {
  const auto path = fresh_path("corrupt.bin");
  const auto inner = mock();
  Completion first;
  {
    const auto c = cached(inner, path);
    first = c->complete("ping", {}, 4);
  }
  {
    // Flip the final byte of the stored value.
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekg(-1, std::ios::end);
    char ch = 0;
    f.get(ch);
    f.seekp(-1, std::ios::end);
    f.put(static_cast<char>(ch ^ 0x55));
  }
  const auto calls_before = inner->calls();
  {
    const auto c = cached(inner, path);
    CHECK(c->corrupt_entries() == 1);
    CHECK(c->complete("ping", {}, 4) == first);
    CHECK(inner->calls() == calls_before + 1);
  }
  const auto c = cached(inner, path);
  CHECK(c->complete("ping", {}, 4) == first);
  CHECK(inner->calls() == calls_before + 1);
}

TEST_CASE("truncated tail is dropped") {
  const auto path = fresh_path("truncated.bin");
  const auto inner = mock();
  {
    const auto c = cached(inner, path);
    c->complete("ping", {}, 1);
    c->complete("ping", {}, 2);
  }
  fs::resize_file(path, fs::file_size(path) - 3);
  const auto c = cached(inner, path);
  CHECK(c->size() == 1);
  CHECK(c->corrupt_entries() == 0);
}

TEST_CASE("foreign file is rejected") {
  const auto path = fresh_path("foreign.bin");
  std::ofstream(path) << "hello";
  CHECK_THROWS_WITH_AS(cached(mock(), path), doctest::Contains("CacheCorrupt"), Error);
}
