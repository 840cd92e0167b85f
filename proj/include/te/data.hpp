#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace te::data {

/// Relative path (under data/) and CRC-32 of every bundled file.
const std::vector<std::pair<std::string_view, std::uint32_t>>& bundled_checksums();

/// Reads a bundled data file, from `dir` when given, else from the copy
/// compiled into the library. Throws DataMissing or ChecksumMismatch.
std::string read(std::string_view relative_path, const std::optional<std::filesystem::path>& dir = std::nullopt);

/// Splits a TSV file with a header row into rows of fields. Throws
/// InvalidArgument when a row's width differs from the header's.
std::vector<std::vector<std::string>> parse_tsv(std::string_view text, const std::vector<std::string>& header);

}  // namespace te::data
