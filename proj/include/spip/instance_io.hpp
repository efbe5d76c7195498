#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spip/pathspace.hpp"

namespace spip {

/// Parsed instance document. Rationals are "p/q" strings (plain integers and
/// finite decimals are accepted on input).
///
///   {
///     "maps": [{"a": [["1/2","0"],["0","1/2"]], "b": ["1","0"]}, ...],
///     "epsilon": "1/2",
///     "sample_denominator": "4294967296",   // optional, default 2^32
///     "steps": 3,
///     "x0": [0, 0],
///     "target": [1, 0],                     // optional
///     "seeds": {"noise": 42, "map": 7}      // optional
///   }
struct InstanceFile {
  SpipInstance instance;
  std::optional<std::uint64_t> noise_seed;
  std::optional<std::uint64_t> map_seed;
};

/// Throws ParseError whose where() is "line L, column C" for syntax errors or a
/// JSON pointer such as "/maps/1/a/0/1" for schema errors.
InstanceFile parse_instance(std::string_view text);

InstanceFile load_instance(const std::filesystem::path& path);

nlohmann::json instance_to_json(const InstanceFile& file);

}  // namespace spip
