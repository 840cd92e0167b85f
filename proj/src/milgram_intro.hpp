#pragma once

#include <string>
#include <vector>

namespace te::detail {

const std::vector<std::string>& classic_intro();
const std::vector<std::string>& novel_intro();

}  // namespace te::detail
