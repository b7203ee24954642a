#pragma once

#include <string>
#include <string_view>

#include "engine.hpp"

namespace dualsynth::io {

/// Parses and validates a problem document. Errors are InputError messages of
/// the form "<origin>:<line>:<col>: ..." (syntax) or "<origin>:<line>: <json
/// pointer>: ..." (schema).
engine::Problem parse_problem(std::string_view text, const std::string& origin = "<input>");
engine::Problem load_problem_file(const std::string& path);

/// Sorted keys, all options explicit; parse(canonical_json(p)) reproduces p.
std::string canonical_json(const engine::Problem& p);
/// Lowercase hex SHA-256 of canonical_json.
std::string problem_hash(const engine::Problem& p);

std::string controller_json(const engine::ContinuousController& c);
engine::ContinuousController parse_controller(std::string_view text, const std::string& origin = "<controller>");

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace dualsynth::io
