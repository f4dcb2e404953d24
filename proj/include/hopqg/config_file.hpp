#pragma once

#include <string>
#include <string_view>

#include "hopqg/model.hpp"

namespace hopqg {

// Flat "key = value" text, one pair per line; '#' starts a comment. Keys are
// the ModelConfig field names with lambda1..lambda4 for the loss weights.
// Unknown keys, duplicate keys and unparsable values raise InvalidArgument.
ModelConfig parse_config(std::string_view text, ModelConfig base = {});
ModelConfig load_config(const std::string& path, ModelConfig base = {});
void apply_config_value(ModelConfig& config, std::string_view key, std::string_view value);

// Canonical rendering (every key, fixed order) that parses back to config.
std::string format_config(const ModelConfig& config);

}  // namespace hopqg
