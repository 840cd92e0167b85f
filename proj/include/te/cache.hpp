#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <unordered_map>

#include "te/lm_port.hpp"

namespace te {

/// Persistent memoization of a backend. The file is append-only:
///   "TECACHE1\n" then entries [u32 key_len][u32 val_len][u32 crc32(key+val)][key][val]
/// (little-endian). Entries failing their checksum are skipped with a warning
/// and recomputed on the next request; a truncated tail is cut off on open.
class CachedBackend final : public Backend {
 public:
  CachedBackend(BackendPtr inner, std::filesystem::path path);

  std::string id() const override { return inner_->id(); }
  BackendCapabilities capabilities() const override { return inner_->capabilities(); }

  std::size_t hits() const;
  std::size_t misses() const;
  /// Entries rejected by checksum when the file was opened.
  std::size_t corrupt_entries() const { return corrupt_; }
  std::size_t size() const;

  const std::filesystem::path& path() const { return path_; }

 protected:
  Completion do_complete(const std::string& prompt, const SamplingParams& params, std::uint64_t seed) const override;
  double do_score(const std::string& prompt, const std::string& continuation) const override;

 private:
  void load();
  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& value) const;

  BackendPtr inner_;
  std::filesystem::path path_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::string> entries_;
  mutable std::ofstream out_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
  std::size_t corrupt_ = 0;
};

/// Wraps `backend` with a cache stored at `cache_path`.
std::shared_ptr<CachedBackend> cached(BackendPtr backend, const std::filesystem::path& cache_path);

inline constexpr std::string_view kCacheMagic = "TECACHE1\n";

}  // namespace te
