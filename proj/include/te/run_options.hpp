#pragma once

#include <cstdint>

#include "te/choice_eval.hpp"
#include "te/parallel.hpp"

namespace te {

/// Options shared by the experiment runners.
struct RunOptions {
  ChoiceSettings choice;
  FanOutOptions fan_out;
  std::uint64_t seed = 0;
};

}  // namespace te
