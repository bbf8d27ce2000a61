#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sherlock/semantic_types.hpp"

namespace sherlock {

/// One data column: raw cell strings in order, plus an optional label.
struct Column {
  std::vector<std::string> values;
  std::optional<SemanticType> label;
  std::optional<std::string> source_header;
};

}  // namespace sherlock
