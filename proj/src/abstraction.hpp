#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "partition.hpp"

namespace dualsynth::abstraction {

/// Finite environment alphabet dom(E). Valuation k assigns variable v the
/// value index (k / stride_v) % |values_v|, variable 0 varying fastest.
class EnvAlphabet {
public:
    struct Variable {
        std::string name;
        std::vector<std::string> values;
    };

    EnvAlphabet() = default;
    explicit EnvAlphabet(std::vector<Variable> vars);

    const std::vector<Variable>& variables() const { return vars_; }
    /// Always >= 1: no variables means one dummy valuation.
    std::size_t size() const { return size_; }
    std::size_t value_index(std::size_t valuation, std::size_t var) const;
    const std::string& value(std::size_t valuation, std::size_t var) const;
    /// Inverse of value_index over all variables.
    std::size_t encode(const std::vector<std::size_t>& value_indices) const;
    /// "park=true,door=open", or "-" for the dummy valuation.
    std::string describe(std::size_t valuation) const;

private:
    std::vector<Variable> vars_;
    std::size_t size_ = 1;
};

struct QueryStats {
    std::size_t pessimistic = 0;  // R_p queries issued
    std::size_t optimistic = 0;   // R_o queries issued
    std::size_t naive = 0;        // 2 * leaves^2, a full rebuild
    std::size_t issued() const { return pessimistic + optimistic; }
};

using Adjacency = std::vector<std::vector<std::uint32_t>>;

/// D_p and D_o over the current leaves. Edges are kept between regions; the
/// environment is a free adversary, so (r_a,e_a) -> (r_b,e_b) is an edge for
/// every e_a, e_b whenever r_a -> r_b is.
struct AbstractionPair {
    int iteration = 0;
    std::vector<std::size_t> regions;  // forest node index per local region index
    std::vector<char> initial;
    Adjacency pess;  // sorted, deduplicated
    Adjacency opt;
    QueryStats stats;

    std::size_t region_count() const { return regions.size(); }
    bool has_pess(std::uint32_t a, std::uint32_t b) const;
    bool has_opt(std::uint32_t a, std::uint32_t b) const;
    std::size_t pess_edge_count() const;
    std::size_t opt_edge_count() const;
    /// pess ⊆ opt
    bool edges_nested() const;
};

/// All-pairs construction on the forest's current leaves.
AbstractionPair build_initial(const partition::PartitionForest& forest, const geometry::ControlSystem& sys,
                              unsigned threads = 1);

/// Next-iteration pair after forest.advance_iteration. Winning/losing/maybe
/// membership of the previous leaves is read from their forest status.
/// WW edges are copied from the previous pessimistic relation into both new
/// relations; MW and MM edges are recomputed; losing children get none.
AbstractionPair refine(const AbstractionPair& prev, const partition::PartitionForest& forest,
                       const geometry::ControlSystem& sys, unsigned threads = 1);

std::size_t reachability_queries_saved(const AbstractionPair& pair);

/// JSON {states, initial, pess_edges, opt_edges} over (region, env) states.
std::string fts_json(const AbstractionPair& pair, const partition::PartitionForest& forest, const EnvAlphabet& env);
std::string fts_dot(const AbstractionPair& pair, const partition::PartitionForest& forest, const EnvAlphabet& env);

}  // namespace dualsynth::abstraction
