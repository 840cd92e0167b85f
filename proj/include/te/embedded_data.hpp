#pragma once

#include <optional>
#include <string_view>

namespace te::embedded {

/// Contents of a bundled data file, keyed by its path relative to data/.
std::optional<std::string_view> file(std::string_view relative_path);

}  // namespace te::embedded
