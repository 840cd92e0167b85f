#include "te/cache.hpp"

#include <array>
#include <cmath>
#include <iterator>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

using nlohmann::json;

namespace {

constexpr std::size_t kHeaderBytes = 12;
constexpr std::uint32_t kMaxFieldBytes = 1u << 28;

std::uint32_t read_u32(const std::string& buf, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]);
  return v;
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

CachedBackend::CachedBackend(BackendPtr inner, std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path)) {
  if (!inner_) throw Error(ErrorCode::InvalidArgument, "null backend");
  load();
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::IoError, "cannot open cache for writing: " + path_.string());
}

void CachedBackend::load() {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::string buf;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) buf.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (buf.empty()) {
    std::ofstream init(path_, std::ios::binary | std::ios::trunc);
    init << kCacheMagic;
    if (!init) throw Error(ErrorCode::IoError, "cannot create cache " + path_.string());
    return;
  }
  if (!std::string_view(buf).starts_with(kCacheMagic)) {
    throw Error(ErrorCode::CacheCorrupt, path_.string() + " is not a cache file");
  }

  std::size_t pos = kCacheMagic.size();
  while (pos < buf.size()) {
    if (buf.size() - pos < kHeaderBytes) break;
    const std::uint32_t klen = read_u32(buf, pos);
    const std::uint32_t vlen = read_u32(buf, pos + 4);
    const std::uint32_t crc = read_u32(buf, pos + 8);
    if (klen > kMaxFieldBytes || vlen > kMaxFieldBytes ||
        buf.size() - pos - kHeaderBytes < static_cast<std::size_t>(klen) + vlen) {
      break;
    }
    const std::string_view body(buf.data() + pos + kHeaderBytes, static_cast<std::size_t>(klen) + vlen);
    if (crc32(body) != crc) {
      ++corrupt_;
      log_warning("cache " + path_.string() + ": entry at offset " + std::to_string(pos) +
                  " fails its checksum; treating as a miss");
    } else {
      entries_[std::string(body.substr(0, klen))] = std::string(body.substr(klen));
    }
    pos += kHeaderBytes + klen + vlen;
  }
  if (pos < buf.size()) {
    log_warning("cache " + path_.string() + ": truncating " + std::to_string(buf.size() - pos) +
                " bytes of incomplete trailing entry");
    std::filesystem::resize_file(path_, pos);
  }
}

std::optional<std::string> CachedBackend::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void CachedBackend::store(const std::string& key, const std::string& value) const {
  std::string rec;
  rec.reserve(kHeaderBytes + key.size() + value.size());
  append_u32(rec, static_cast<std::uint32_t>(key.size()));
  append_u32(rec, static_cast<std::uint32_t>(value.size()));
  append_u32(rec, crc32(key + value));
  rec += key;
  rec += value;
  std::lock_guard lock(mu_);
  out_.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "cache write failed: " + path_.string());
  entries_[key] = value;
}

std::size_t CachedBackend::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t CachedBackend::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::size_t CachedBackend::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Completion CachedBackend::do_complete(const std::string& prompt, const SamplingParams& params,
                                      std::uint64_t seed) const {
  const json jp{{"temperature", params.temperature},
                {"top_p", params.top_p},
                {"max_tokens", params.max_tokens},
                {"stop", params.stop_sequences}};
  const std::string key = json::array({inner_->id(), "complete", prompt, jp, seed}).dump();
  if (auto hit = lookup(key)) {
    try {
      return completion_from_json(json::parse(*hit));
    } catch (const json::exception&) {
      log_warning("cache " + path_.string() + ": undecodable completion entry; recomputing");
    }
  }
  Completion c = inner_->complete(prompt, params, seed);
  store(key, to_json(c).dump());
  return c;
}

double CachedBackend::do_score(const std::string& prompt, const std::string& continuation) const {
  const std::string key = json::array({inner_->id(), "score", prompt, continuation}).dump();
  if (auto hit = lookup(key)) {
    try {
      const json v = json::parse(*hit);
      if (v.is_string() && v.get<std::string>() == "-inf") return kNegInf;
      return v.get<double>();
    } catch (const json::exception&) {
      log_warning("cache " + path_.string() + ": undecodable score entry; recomputing");
    }
  }
  const double lp = inner_->score(prompt, continuation);
  store(key, std::isinf(lp) ? json("-inf").dump() : json(lp).dump());
  return lp;
}

std::shared_ptr<CachedBackend> cached(BackendPtr backend, const std::filesystem::path& cache_path) {
  return std::make_shared<CachedBackend>(std::move(backend), cache_path);
}

}  // namespace te
