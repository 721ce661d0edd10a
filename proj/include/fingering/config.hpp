#pragma once

#include "fingering/simulation.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fingering {

/// Parses a `key = value` document into a validated RunConfig.
///
/// Blank lines and `#` comments are ignored. Missing keys keep their defaults
/// (100 x 200 domain on 96 x 192 cells, D = 0.005, alpha = R = k = 1, kappa = 0,
/// step profile 1 | 2 at y = 100 with a 1e-3 interface perturbation). Unknown
/// keys, duplicate keys, malformed values and constraint violations are all
/// collected and reported together in one ConfigError.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Sets one key as if it appeared in a config document. Returns an error message,
/// or an empty string on success. Does not validate cross-field constraints.
std::string apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Every recognised key, in documentation order.
std::vector<std::string> config_keys();

/// Serialises a config as a document that parse_config reads back identically.
std::string format_config(const RunConfig& cfg);

}  // namespace fingering
