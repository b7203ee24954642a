#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "abstraction.hpp"
#include "formula.hpp"

namespace dualsynth::gr1 {

struct ResponseObligation {
    std::string trigger;
    std::string response;
};

/// Specification as written in a problem file. `ltl` is an optional single
/// formula that is decomposed and merged with the explicit lists.
struct RawSpec {
    std::string init;
    std::vector<std::string> assumptions;
    std::vector<std::string> guarantees;
    std::vector<ResponseObligation> responses;
    std::string ltl;
};

/// b is set by the trigger and cleared by the response at the same step:
/// b[t] = (b[t-1] | trigger[t]) & !response[t], b[-1] = 0.
struct MemoryBit {
    std::string name;
    formula::ExprPtr trigger;
    formula::ExprPtr response;
};

/// (&_i GF p_i) -> (&_j GF q_j), with init a Boolean formula over labels.
struct Gr1Spec {
    formula::ExprPtr init;  // null means true
    std::vector<formula::ExprPtr> assumptions;
    std::vector<formula::ExprPtr> guarantees;
    std::vector<MemoryBit> bits;
};

/// GF phi passes through, G(trigger -> F response) becomes a memory bit b
/// and the guarantee GF(!b | response), a Boolean conjunct becomes init.
/// Throws InputError naming the first unsupported operator.
Gr1Spec convert_to_gr1(const RawSpec& raw);

struct CompiledSpec {
    formula::Predicate init;
    std::vector<formula::Predicate> assumptions;
    std::vector<formula::Predicate> guarantees;
    std::vector<formula::Predicate> triggers;
    std::vector<formula::Predicate> responses;
    std::vector<std::string> bit_names;
};

/// `vocab.bits` is ignored and replaced by the spec's bits. Names must be
/// unique across labels, environment variables and bits.
CompiledSpec compile_spec(const Gr1Spec& spec, const formula::Vocabulary& vocab);

inline constexpr std::uint32_t kUnranked = std::numeric_limits<std::uint32_t>::max();

/// Game on nodes (region, env, bits), node id ((r * E) + e) * 2^B + bits.
/// At node (r, e, b) the system picks r' in succ[r] knowing e, then the
/// environment picks e' freely; the play moves to (r', e', update(b, r', e')).
struct GameGraph {
    std::size_t regions = 0;
    std::size_t envs = 1;
    std::size_t bits = 0;
    abstraction::Adjacency succ;
    std::vector<std::vector<char>> assumption;  // [i][node]
    std::vector<std::vector<char>> guarantee;   // [j][node]
    std::vector<std::uint32_t> update;          // [(b * regions + r) * envs + e]

    GameGraph() = default;
    GameGraph(std::size_t regions, std::size_t envs, std::size_t bits, std::size_t assumptions, std::size_t guarantees);

    std::size_t memory_values() const { return std::size_t{1} << bits; }
    std::size_t node_count() const { return regions * envs * memory_values(); }
    std::size_t node(std::size_t r, std::size_t e, std::uint32_t b) const { return ((r * envs) + e) * memory_values() + b; }
    std::size_t region_of(std::size_t v) const { return v / memory_values() / envs; }
    std::size_t env_of(std::size_t v) const { return (v / memory_values()) % envs; }
    std::uint32_t bits_of(std::size_t v) const { return static_cast<std::uint32_t>(v % memory_values()); }
    std::uint32_t next_bits(std::uint32_t b, std::size_t r, std::size_t e) const {
        return update[(b * regions + r) * envs + e];
    }
    /// Node entered at the start of a play: no obligation pending before it.
    std::size_t fresh_node(std::size_t r, std::size_t e) const { return node(r, e, next_bits(0, r, e)); }
    std::size_t assumption_count() const { return assumption.size(); }
    std::size_t guarantee_count() const { return guarantee.size(); }

    /// Throws std::invalid_argument on inconsistent table sizes.
    void validate() const;
};

/// Builds the game over an abstraction relation. region_labels[r][k] says
/// whether label k of the vocabulary holds in region r.
GameGraph make_game(const abstraction::Adjacency& succ, const std::vector<std::vector<char>>& region_labels,
                    const CompiledSpec& spec, std::size_t envs);

/// Turns a region into a winning sink: a self-loop on which every assumption
/// and guarantee holds.
void make_winning_sink(GameGraph& g, std::size_t region);

struct Solution {
    std::vector<char> winning;                // [node], the greatest fixpoint Z
    std::vector<std::vector<std::uint32_t>> rank;  // [j][node], kUnranked outside Z
    std::uint32_t ring_stride = 2;            // ranks are ring * stride + sub
};

Solution solve_game(const GameGraph& g);

/// One position of a run: truth of each assumption p_i and guarantee q_j.
struct Letter {
    std::vector<char> p;
    std::vector<char> q;
};

struct MemoryState {
    std::uint32_t region = 0;
    std::uint32_t bits = 0;     // memory bits before the current step
    std::uint32_t counter = 0;  // guarantee being pursued before the current step
    auto operator<=>(const MemoryState&) const = default;
};

/// Finite-memory controller. In memory state m with current environment e
/// it visits node(m.region, e, update(m.bits, m.region, e)), moves its
/// counter past a satisfied guarantee, and names the next region.
struct StrategyAutomaton {
    std::size_t envs = 1;
    std::vector<MemoryState> states;
    std::vector<std::vector<std::int64_t>> next;  // [state][env] -> state, -1 if undefined
    std::vector<std::size_t> initial;             // one per initial region, memory (r, 0, 0)
    std::vector<std::vector<Letter>> letters;     // [state][env], labels of the node visited

    std::int64_t find(const MemoryState& m) const;
    std::size_t transition_count() const;
};

/// Explores every memory state reachable from (r, 0, 0), r in initial_regions,
/// under all environment inputs. Initial regions outside the winning set are
/// skipped.
StrategyAutomaton extract_strategy(const GameGraph& g, const Solution& sol,
                                   const std::vector<std::uint32_t>& initial_regions);

/// One step of the counter strategy from memory state m under input e.
/// Returns nullopt if the visited node is not winning.
struct Step {
    std::size_t node;
    MemoryState next;
};
std::optional<Step> strategy_step(const GameGraph& g, const Solution& sol, const MemoryState& m, std::size_t e);

/// Every node visited along every run of the automaton lies in sol.winning,
/// and every move follows an edge of g.
bool strategy_invariance_check(const StrategyAutomaton& a, const GameGraph& g, const Solution& sol);

/// (some p_i absent from the cycle) or (every q_j present in the cycle).
/// Throws std::invalid_argument if the cycle is empty.
bool check_lasso(const std::vector<Letter>& prefix, const std::vector<Letter>& cycle);
Letter letter_of(const GameGraph& g, std::size_t node);

/// JSON {memory_states, initial, transitions} with regions named by `region_names`.
std::string strategy_json(const StrategyAutomaton& a, const std::vector<std::string>& region_names,
                          const std::vector<std::string>& env_names);

}  // namespace dualsynth::gr1
