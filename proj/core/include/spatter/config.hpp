#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "spatter/models.hpp"
#include "spatter/search.hpp"

namespace spatter {

// Everything a run can be configured with. Text form is one `key = value`
// per line, `#` comments, keys as printed by to_text().
struct RunConfig {
  TrainConfig train;
  SearchConfig search;
  double grow_fraction = 0.9;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Applies the settings in `text` on top of `base`. Throws BadConfig with
/// the line number for unknown keys or unparsable values.
RunConfig parse_config(std::string_view text, RunConfig base = {});

/// Sets one key. Throws BadConfig.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

std::string to_text(const RunConfig& config);
std::string to_text(const TrainConfig& config);
TrainConfig parse_train_config(std::string_view text);

}  // namespace spatter
