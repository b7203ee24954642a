#include "abstraction.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "errors.hpp"
#include "parallel.hpp"

namespace dualsynth::abstraction {

using partition::PartitionForest;
using partition::Status;

EnvAlphabet::EnvAlphabet(std::vector<Variable> vars) : vars_(std::move(vars)) {
    size_ = 1;
    for (const auto& v : vars_) {
        if (v.values.empty()) throw InputError("environment variable '" + v.name + "' has no values");
        size_ *= v.values.size();
    }
}

std::size_t EnvAlphabet::value_index(std::size_t valuation, std::size_t var) const {
    for (std::size_t k = 0; k < var; ++k) valuation /= vars_[k].values.size();
    return valuation % vars_.at(var).values.size();
}

const std::string& EnvAlphabet::value(std::size_t valuation, std::size_t var) const {
    return vars_.at(var).values[value_index(valuation, var)];
}

std::size_t EnvAlphabet::encode(const std::vector<std::size_t>& value_indices) const {
    if (value_indices.size() != vars_.size()) throw std::invalid_argument("env encode: wrong number of values");
    std::size_t code = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (value_indices[k] >= vars_[k].values.size()) throw std::out_of_range("env encode: value out of range");
        code += value_indices[k] * stride;
        stride *= vars_[k].values.size();
    }
    return code;
}

std::string EnvAlphabet::describe(std::size_t valuation) const {
    if (vars_.empty()) return "-";
    std::string out;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (k) out += ',';
        out += vars_[k].name + "=" + value(valuation, k);
    }
    return out;
}

bool AbstractionPair::has_pess(std::uint32_t a, std::uint32_t b) const {
    return std::binary_search(pess.at(a).begin(), pess.at(a).end(), b);
}

bool AbstractionPair::has_opt(std::uint32_t a, std::uint32_t b) const {
    return std::binary_search(opt.at(a).begin(), opt.at(a).end(), b);
}

std::size_t AbstractionPair::pess_edge_count() const {
    std::size_t n = 0;
    for (const auto& row : pess) n += row.size();
    return n;
}

std::size_t AbstractionPair::opt_edge_count() const {
    std::size_t n = 0;
    for (const auto& row : opt) n += row.size();
    return n;
}

bool AbstractionPair::edges_nested() const {
    for (std::size_t a = 0; a < pess.size(); ++a) {
        if (!std::includes(opt[a].begin(), opt[a].end(), pess[a].begin(), pess[a].end())) return false;
    }
    return true;
}

namespace {

struct RowResult {
    std::vector<std::uint32_t> pess;
    std::vector<std::uint32_t> opt;
    std::size_t p_queries = 0;
    std::size_t o_queries = 0;
};

// Optimistic edges: R_p, or a landing strictly inside the target. R_o is only
// asked when R_p fails.
RowResult compute_row(const geometry::Box& from, const std::vector<std::uint32_t>& targets,
                      const std::vector<const geometry::Box*>& boxes, const geometry::ControlSystem& sys) {
    RowResult row;
    for (std::uint32_t t : targets) {
        const geometry::Box& to = *boxes[t];
        ++row.p_queries;
        if (geometry::reach_pessimistic(from, to, sys)) {
            row.pess.push_back(t);
            row.opt.push_back(t);
            continue;
        }
        ++row.o_queries;
        if (geometry::reach_optimistic_interior(from, to, sys)) row.opt.push_back(t);
    }
    return row;
}

AbstractionPair skeleton(const PartitionForest& forest, std::vector<const geometry::Box*>& boxes) {
    AbstractionPair pair;
    pair.iteration = forest.iteration();
    pair.regions = forest.leaves();
    const std::size_t n = pair.regions.size();
    pair.initial.resize(n);
    boxes.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& node = forest.node(pair.regions[k]);
        pair.initial[k] = node.initial ? 1 : 0;
        boxes[k] = &node.box;
    }
    pair.pess.assign(n, {});
    pair.opt.assign(n, {});
    pair.stats.naive = 2 * n * n;
    return pair;
}

void fill_rows(AbstractionPair& pair, const std::vector<std::uint32_t>& sources,
               const std::vector<std::uint32_t>& targets, const std::vector<const geometry::Box*>& boxes,
               const geometry::ControlSystem& sys, unsigned threads) {
    std::vector<RowResult> rows(sources.size());
    parallel_for(sources.size(), threads,
                 [&](std::size_t k) { rows[k] = compute_row(*boxes[sources[k]], targets, boxes, sys); });
    for (std::size_t k = 0; k < sources.size(); ++k) {
        auto& p = pair.pess[sources[k]];
        auto& o = pair.opt[sources[k]];
        p.insert(p.end(), rows[k].pess.begin(), rows[k].pess.end());
        o.insert(o.end(), rows[k].opt.begin(), rows[k].opt.end());
        pair.stats.pessimistic += rows[k].p_queries;
        pair.stats.optimistic += rows[k].o_queries;
    }
}

void normalize(Adjacency& adj) {
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
}

}  // namespace

AbstractionPair build_initial(const PartitionForest& forest, const geometry::ControlSystem& sys, unsigned threads) {
    std::vector<const geometry::Box*> boxes;
    AbstractionPair pair = skeleton(forest, boxes);
    std::vector<std::uint32_t> all(pair.region_count());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<std::uint32_t>(k);
    fill_rows(pair, all, all, boxes, sys, threads);
    normalize(pair.pess);
    normalize(pair.opt);
    return pair;
}

AbstractionPair refine(const AbstractionPair& prev, const PartitionForest& forest, const geometry::ControlSystem& sys,
                       unsigned threads) {
    if (forest.iteration() != prev.iteration + 1) {
        throw InternalError("refine: abstraction is at iteration " + std::to_string(prev.iteration) +
                            " but the partition is at " + std::to_string(forest.iteration()));
    }
    std::vector<const geometry::Box*> boxes;
    AbstractionPair pair = skeleton(forest, boxes);

    std::unordered_map<std::size_t, std::uint32_t> local;  // forest node -> new local index
    for (std::size_t k = 0; k < pair.regions.size(); ++k) local[pair.regions[k]] = static_cast<std::uint32_t>(k);

    // pass-through child of each previous region, or none if it was split
    std::vector<std::int64_t> child_of(prev.region_count(), -1);
    std::vector<Status> parent_status(prev.region_count());
    std::vector<std::uint32_t> maybe_children;
    std::vector<std::uint32_t> targets;
    for (std::size_t a = 0; a < prev.region_count(); ++a) {
        const auto& parent = forest.node(prev.regions[a]);
        if (parent.children.empty()) {
            throw InternalError("refine: region " + partition::to_string(parent.id) + " was not advanced");
        }
        parent_status[a] = parent.status;
        if (parent.status == Status::Maybe) {
            for (std::size_t c : parent.children) {
                maybe_children.push_back(local.at(c));
                targets.push_back(local.at(c));
            }
        } else if (parent.status == Status::Winning) {
            child_of[a] = local.at(parent.children.front());
            targets.push_back(local.at(parent.children.front()));
        } else if (parent.status != Status::Losing) {
            throw InternalError("refine: region " + partition::to_string(parent.id) + " has no classification");
        }
    }
    std::sort(maybe_children.begin(), maybe_children.end());
    std::sort(targets.begin(), targets.end());

    // WW: copies of the previous pessimistic relation, into both relations
    for (std::size_t a = 0; a < prev.region_count(); ++a) {
        if (parent_status[a] != Status::Winning) continue;
        for (std::uint32_t b : prev.pess[a]) {
            if (parent_status[b] != Status::Winning) continue;
            const auto ca = static_cast<std::uint32_t>(child_of[a]);
            const auto cb = static_cast<std::uint32_t>(child_of[b]);
            pair.pess[ca].push_back(cb);
            pair.opt[ca].push_back(cb);
        }
    }
    // MW and MM
    fill_rows(pair, maybe_children, targets, boxes, sys, threads);
    normalize(pair.pess);
    normalize(pair.opt);
    return pair;
}

std::size_t reachability_queries_saved(const AbstractionPair& pair) {
    return pair.stats.naive >= pair.stats.issued() ? pair.stats.naive - pair.stats.issued() : 0;
}

namespace {

nlohmann::json box_json(const geometry::Box& b) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t d = 0; d < b.dim(); ++d) out.push_back({b.lower(d), b.upper(d)});
    return out;
}

}  // namespace

std::string fts_json(const AbstractionPair& pair, const PartitionForest& forest, const EnvAlphabet& env) {
    const std::size_t E = env.size();
    nlohmann::json states = nlohmann::json::array();
    nlohmann::json initial = nlohmann::json::array();
    for (std::size_t r = 0; r < pair.region_count(); ++r) {
        const auto& node = forest.node(pair.regions[r]);
        for (std::size_t e = 0; e < E; ++e) {
            const std::size_t id = r * E + e;
            states.push_back({{"id", id},
                              {"region", partition::to_string(node.id)},
                              {"env", env.describe(e)},
                              {"box", box_json(node.box)}});
            if (pair.initial[r]) initial.push_back(id);
        }
    }
    auto edges = [&](const Adjacency& adj) {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t a = 0; a < adj.size(); ++a)
            for (std::uint32_t b : adj[a])
                for (std::size_t ea = 0; ea < E; ++ea)
                    for (std::size_t eb = 0; eb < E; ++eb) out.push_back({a * E + ea, b * E + eb});
        return out;
    };
    nlohmann::json doc = {{"iteration", pair.iteration},
                          {"states", std::move(states)},
                          {"initial", std::move(initial)},
                          {"pess_edges", edges(pair.pess)},
                          {"opt_edges", edges(pair.opt)}};
    return doc.dump(2) + "\n";
}

std::string fts_dot(const AbstractionPair& pair, const PartitionForest& forest, const EnvAlphabet& env) {
    std::string out = "digraph fts {\n  rankdir=LR;\n";
    for (std::size_t r = 0; r < pair.region_count(); ++r) {
        const auto& node = forest.node(pair.regions[r]);
        out += "  r" + std::to_string(r) + " [label=\"" + partition::to_string(node.id) + "\"" +
               (pair.initial[r] ? ", shape=doublecircle" : "") + "];\n";
    }
    for (std::size_t a = 0; a < pair.region_count(); ++a) {
        for (std::uint32_t b : pair.opt[a]) {
            const bool p = pair.has_pess(static_cast<std::uint32_t>(a), b);
            out += "  r" + std::to_string(a) + " -> r" + std::to_string(b) + (p ? ";\n" : " [style=dashed];\n");
        }
    }
    out += "  // every edge holds for all " + std::to_string(env.size()) +
           " environment valuations on both ends; dashed = optimistic only\n}\n";
    return out;
}

}  // namespace dualsynth::abstraction
