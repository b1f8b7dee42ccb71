#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mvreg/pipeline.hpp"

namespace mvreg {

/// Flat "key = value" text, one PipelineConfig field per key; '#' starts a comment.
/// Confidence parameters use the keys steepness, inlier_midpoint and residual_scale;
/// connectivity is a list of "i-j" pairs separated by whitespace or commas.
/// Unknown or repeated keys and unparsable or out-of-range values throw InvalidConfig.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base = {});
/// Inverse of parse_config; every key is written.
std::string format_config(const PipelineConfig& cfg);

}  // namespace mvreg
