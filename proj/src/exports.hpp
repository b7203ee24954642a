#pragma once

#include <string>
#include <vector>

#include "engine.hpp"

namespace dualsynth::io {

std::string verdict_json(const engine::Verdict& v, const std::string& problem_hash);
std::string partition_json(const engine::IterationRecord& rec);
/// 2-D problems only; throws std::invalid_argument otherwise.
std::string partition_svg(const engine::IterationRecord& rec, const geometry::ControlSystem& sys);
/// Columns t, s_0..s_{n-1}, e, u_0..u_{m-1}, region, memory. The last row has empty u.
std::string trace_csv(const engine::Execution& ex, const std::vector<std::string>& env_names, std::size_t input_dim);

struct ArtifactOptions {
    bool fts = false;  // also write fts.json and fts.dot for the final iteration
};

/// verdict.json, controller.json (if realizable), partition_<i>.json and, in
/// 2-D, partition_<i>.svg. Creates `dir` if needed. Returns the files written.
std::vector<std::string> write_artifacts(const std::string& dir, const engine::Verdict& v, const engine::Problem& p,
                                         const ArtifactOptions& opts = {});

struct Report {
    std::string json;  // {rows:[...], outcome, warnings:[...]}
    std::string text;  // aligned table
    std::vector<std::string> warnings;
    bool partial = false;
};

/// Summary of a run directory. Missing pieces give a partial report with
/// warnings; a directory with nothing readable throws InputError.
Report make_report(const std::string& dir);

}  // namespace dualsynth::io
