#include "te/data.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "te/embedded_data.hpp"
#include "te/error.hpp"
#include "te/util.hpp"

namespace te::data {

const std::vector<std::pair<std::string_view, std::uint32_t>>& bundled_checksums() {
  static const std::vector<std::pair<std::string_view, std::uint32_t>> kChecksums = {
      {"surnames/american_indian_alaska_native.txt", 0x310ba265},
      {"surnames/asian_pacific_islander.txt", 0x3324f604},
      {"surnames/black_african_american.txt", 0x3c292f9b},
      {"surnames/hispanic_latino.txt", 0x024e78d3},
      {"surnames/white.txt", 0xab826809},
      {"sentences/christianson2001.tsv", 0x1233540e},
      {"sentences/authors.tsv", 0x5d558a6e},
      {"crowd_questions.tsv", 0x8e1fe178},
  };
  return kChecksums;
}

std::string read(std::string_view relative_path, const std::optional<std::filesystem::path>& dir) {
  std::optional<std::uint32_t> expected;
  for (const auto& [path, crc] : bundled_checksums()) {
    if (path == relative_path) expected = crc;
  }
  std::string content;
  if (dir) {
    const auto full = *dir / std::filesystem::path(std::string(relative_path));
    std::ifstream in(full, std::ios::binary);
    if (!in) throw Error(ErrorCode::DataMissing, "cannot read " + full.string());
    content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    auto embedded = embedded::file(relative_path);
    if (!embedded) throw Error(ErrorCode::DataMissing, "no bundled file " + std::string(relative_path));
    content = std::string(*embedded);
  }
  if (expected && crc32(content) != *expected) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "crc32 %08x, expected %08x", crc32(content), *expected);
    throw Error(ErrorCode::ChecksumMismatch, std::string(relative_path) + ": " + buf);
  }
  return content;
}

std::vector<std::vector<std::string>> parse_tsv(std::string_view text, const std::vector<std::string>& header) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (first) {
      first = false;
      if (fields != header) throw Error(ErrorCode::InvalidArgument, "unexpected TSV header: " + line);
      continue;
    }
    if (fields.size() != header.size()) throw Error(ErrorCode::InvalidArgument, "bad TSV row: " + line);
    rows.push_back(std::move(fields));
  }
  if (first) throw Error(ErrorCode::DataMissing, "empty TSV file");
  return rows;
}

}  // namespace te::data
