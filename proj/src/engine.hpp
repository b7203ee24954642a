#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "abstraction.hpp"
#include "geometry.hpp"
#include "gr1.hpp"
#include "partition.hpp"

namespace dualsynth::engine {

struct Options {
    int m = 0;  // split factor, 0 means 2^n
    int max_iters = 20;
    double min_cell = 1e-3;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool rebuild_check = false;
};

struct Problem {
    geometry::ControlSystem sys;
    abstraction::EnvAlphabet env;
    gr1::RawSpec spec;
    Options options;
};

enum class Outcome { Realizable, Unrealizable, Unknown };
const char* to_string(Outcome o);

struct SetTriple {
    std::set<partition::RegionId> winning;
    std::set<partition::RegionId> losing;
    std::set<partition::RegionId> maybe;
    friend bool operator==(const SetTriple&, const SetTriple&) = default;
};

struct LeafInfo {
    partition::RegionId id;
    geometry::Box box;
    partition::Status status = partition::Status::Unexplored;
    std::vector<std::string> labels;
    bool initial = false;
};

struct IterationStats {
    int iteration = 0;
    std::size_t leaves = 0;
    std::size_t winning = 0;
    std::size_t maybe = 0;
    std::size_t losing = 0;
    std::size_t queries_issued = 0;
    std::size_t queries_saved = 0;
    std::size_t queries_naive = 0;
    std::size_t pess_edges = 0;
    std::size_t opt_edges = 0;
    bool edges_nested = true;
    bool rebuild_checked = false;
    double wall_ms = 0.0;
};

struct IterationRecord {
    IterationStats stats;
    std::vector<LeafInfo> leaves;
};

/// Strategy automaton over the winning regions plus the boxes needed to turn
/// its region choices into inputs.
struct ContinuousController {
    std::vector<partition::RegionId> region_ids;
    std::vector<geometry::Box> boxes;
    gr1::StrategyAutomaton automaton;
    std::vector<std::string> env_names;
    std::string problem_hash;
};

struct Verdict {
    Outcome outcome = Outcome::Unknown;
    std::string reason;  // Unknown: "max_iters" or "min_cell"
    int iterations = 0;  // classification rounds
    std::vector<geometry::Box> witness;
    std::vector<IterationRecord> history;
    std::optional<ContinuousController> controller;
    std::shared_ptr<const partition::PartitionForest> forest;
    std::shared_ptr<const abstraction::AbstractionPair> abstraction;
};

/// Everything classify needs besides the abstraction.
struct Context {
    const geometry::ControlSystem* sys = nullptr;
    const abstraction::EnvAlphabet* env = nullptr;
    gr1::CompiledSpec spec;
    std::vector<std::string> labels;
};

Context make_context(const Problem& problem);

/// Winning: robustly winning in D_p, every env and every memory value, using
/// only winning regions. Losing: the fresh node loses in D_o for every env.
/// With `seeded`, leaves inherited as Winning become winning sinks.
SetTriple classify(const abstraction::AbstractionPair& pair, const partition::PartitionForest& forest,
                   const Context& ctx, bool seeded);

/// The iterative refinement loop. Throws InputError on bad input and
/// InternalError if a soundness check fails.
Verdict run(const Problem& problem, const Options& options);

struct ExecutionRow {
    int t = 0;
    geometry::Vector s;
    std::size_t env = 0;
    std::optional<geometry::Vector> u;  // none on the last row
    partition::RegionId region;
    std::size_t memory = 0;
};

struct Execution {
    std::vector<ExecutionRow> rows;
};

/// Controlled execution from s0. env_trace[t] is e[t]; the last entry is held
/// when the trace is shorter than the run. Throws RefusalError if s0 is not in
/// the initial set or not covered by the controller.
Execution simulate(const ContinuousController& controller, const geometry::ControlSystem& sys,
                   const std::vector<std::size_t>& env_trace, std::span<const double> s0, int steps);

/// Tolerance used when checking that a state landed in its region box.
inline constexpr double kLandingTolerance = 1e-7;

}  // namespace dualsynth::engine
