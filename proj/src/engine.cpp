#include "engine.hpp"

#include <algorithm>
#include <chrono>

#include <spdlog/spdlog.h>

#include "errors.hpp"
#include "problem_io.hpp"

namespace dualsynth::engine {

using partition::PartitionForest;
using partition::RegionId;
using partition::Status;

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Realizable: return "realizable";
        case Outcome::Unrealizable: return "unrealizable";
        case Outcome::Unknown: break;
    }
    return "unknown";
}

Context make_context(const Problem& problem) {
    Context ctx;
    ctx.sys = &problem.sys;
    ctx.env = &problem.env;
    for (const auto& p : problem.sys.propositions) ctx.labels.push_back(p.name);
    formula::Vocabulary vocab{ctx.labels, problem.env, {}};
    ctx.spec = gr1::compile_spec(gr1::convert_to_gr1(problem.spec), vocab);
    return ctx;
}

namespace {

std::vector<std::vector<char>> label_table(const std::vector<std::size_t>& nodes, const PartitionForest& forest,
                                           const std::vector<std::string>& labels) {
    std::vector<std::vector<char>> out;
    out.reserve(nodes.size());
    for (std::size_t idx : nodes) {
        const auto& have = forest.node(idx).labels;
        std::vector<char> row(labels.size(), 0);
        for (std::size_t k = 0; k < labels.size(); ++k)
            row[k] = std::binary_search(have.begin(), have.end(), labels[k]) ? 1 : 0;
        out.push_back(std::move(row));
    }
    return out;
}

bool robustly_winning(const gr1::GameGraph& g, const gr1::Solution& sol, std::size_t r) {
    for (std::size_t e = 0; e < g.envs; ++e)
        for (std::uint32_t b = 0; b < g.memory_values(); ++b)
            if (!sol.winning[g.node(r, e, g.next_bits(b, r, e))]) return false;
    return true;
}

// Largest set of regions that are robustly winning when play is confined to it.
std::vector<char> robust_winning_regions(gr1::GameGraph g) {
    const auto base = g.succ;
    std::vector<char> cand(g.regions, 1);
    for (;;) {
        for (std::size_t r = 0; r < g.regions; ++r) {
            g.succ[r].clear();
            if (!cand[r]) continue;
            for (auto t : base[r])
                if (cand[t]) g.succ[r].push_back(t);
        }
        const gr1::Solution sol = gr1::solve_game(g);
        std::vector<char> next(g.regions, 0);
        for (std::size_t r = 0; r < g.regions; ++r) next[r] = cand[r] && robustly_winning(g, sol, r);
        if (next == cand) return cand;
        cand = std::move(next);
    }
}

}  // namespace

SetTriple classify(const abstraction::AbstractionPair& pair, const PartitionForest& forest, const Context& ctx,
                   bool seeded) {
    const std::size_t R = pair.region_count();
    const std::size_t E = ctx.env->size();
    const auto labels = label_table(pair.regions, forest, ctx.labels);
    gr1::GameGraph gp = gr1::make_game(pair.pess, labels, ctx.spec, E);
    gr1::GameGraph go = gr1::make_game(pair.opt, labels, ctx.spec, E);
    if (seeded) {
        for (std::size_t r = 0; r < R; ++r) {
            if (forest.node(pair.regions[r]).status != Status::Winning) continue;
            gr1::make_winning_sink(gp, r);
            gr1::make_winning_sink(go, r);
        }
    }
    const std::vector<char> win = robust_winning_regions(gp);
    const gr1::Solution so = gr1::solve_game(go);

    SetTriple out;
    for (std::size_t r = 0; r < R; ++r) {
        const RegionId& id = forest.node(pair.regions[r]).id;
        bool lose = true;
        for (std::size_t e = 0; e < E && lose; ++e) lose = !so.winning[go.fresh_node(r, e)];
        if (win[r] && lose) throw InternalError("region " + partition::to_string(id) + " is both winning and losing");
        if (win[r]) {
            out.winning.insert(id);
        } else if (lose) {
            out.losing.insert(id);
        } else {
            out.maybe.insert(id);
        }
    }
    return out;
}

namespace {

ContinuousController build_controller(const abstraction::AbstractionPair& pair, const PartitionForest& forest,
                                      const Context& ctx, const SetTriple& triple) {
    std::vector<std::int64_t> local(pair.region_count(), -1);
    std::vector<std::size_t> nodes;
    ContinuousController c;
    for (std::size_t r = 0; r < pair.region_count(); ++r) {
        const auto& node = forest.node(pair.regions[r]);
        if (!triple.winning.count(node.id)) continue;
        local[r] = static_cast<std::int64_t>(nodes.size());
        nodes.push_back(pair.regions[r]);
        c.region_ids.push_back(node.id);
        c.boxes.push_back(node.box);
    }
    abstraction::Adjacency succ(nodes.size());
    for (std::size_t r = 0; r < pair.region_count(); ++r) {
        if (local[r] < 0) continue;
        for (auto t : pair.pess[r])
            if (local[t] >= 0) succ[static_cast<std::size_t>(local[r])].push_back(static_cast<std::uint32_t>(local[t]));
    }
    const gr1::GameGraph g = gr1::make_game(succ, label_table(nodes, forest, ctx.labels), ctx.spec, ctx.env->size());
    const gr1::Solution sol = gr1::solve_game(g);
    std::vector<std::uint32_t> all(nodes.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
        all[k] = static_cast<std::uint32_t>(k);
        if (!robustly_winning(g, sol, k))
            throw InternalError("winning region " + partition::to_string(c.region_ids[k]) +
                                " is not winning on the winning subgraph");
    }
    c.automaton = gr1::extract_strategy(g, sol, all);
    if (c.automaton.initial.size() != all.size() || !gr1::strategy_invariance_check(c.automaton, g, sol))
        throw InternalError("extracted strategy leaves the winning set");
    for (std::size_t e = 0; e < ctx.env->size(); ++e) c.env_names.push_back(ctx.env->describe(e));
    return c;
}

void check_init(const PartitionForest& forest, const Context& ctx) {
    for (std::size_t leaf : forest.leaves()) {
        const auto& node = forest.node(leaf);
        if (!node.initial) continue;
        std::vector<char> labels(ctx.labels.size(), 0);
        for (std::size_t k = 0; k < ctx.labels.size(); ++k)
            labels[k] = std::binary_search(node.labels.begin(), node.labels.end(), ctx.labels[k]);
        bool ok = false;
        for (std::size_t e = 0; e < ctx.env->size() && !ok; ++e) ok = ctx.spec.init.eval({&labels, e, 0});
        if (!ok) {
            throw InputError("initial cell " + node.box.to_string() + " does not satisfy init '" +
                             ctx.spec.init.source() + "'");
        }
    }
}

}  // namespace

Verdict run(const Problem& problem, const Options& options) {
    const auto& sys = problem.sys;
    sys.validate();
    const Context ctx = make_context(problem);
    const std::size_t n = sys.state_dim();
    if (options.m < 0) throw InputError("m must be positive");
    if (options.m == 0 && n > 16) throw InputError("state dimension too large for the default split factor");
    const int m = options.m > 0 ? options.m : 1 << n;
    if (m < 2) throw InputError("m must be at least 2");
    if (options.max_iters < 1) throw InputError("max_iters must be at least 1");
    if (!(options.min_cell >= 0.0)) throw InputError("min_cell must be nonnegative");

    using clock = std::chrono::steady_clock;
    auto started = clock::now();
    auto forest = std::make_shared<PartitionForest>(PartitionForest::initial(sys));
    check_init(*forest, ctx);
    auto pair = std::make_shared<abstraction::AbstractionPair>(abstraction::build_initial(*forest, sys, options.threads));

    Verdict v;
    for (;;) {
        const bool seeded = forest->iteration() > 0;
        const SetTriple triple = classify(*pair, *forest, ctx, seeded);
        IterationRecord rec;
        if (options.rebuild_check) {
            if (classify(*pair, *forest, ctx, false) != triple) {
                throw InternalError("iteration " + std::to_string(forest->iteration()) +
                                    ": seeded classification differs from a from-scratch solve");
            }
            rec.stats.rebuild_checked = true;
        }
        for (std::size_t leaf : forest->leaves()) {
            const auto& node = forest->node(leaf);
            const Status s = triple.winning.count(node.id) ? Status::Winning
                             : triple.losing.count(node.id) ? Status::Losing
                                                            : Status::Maybe;
            if (node.status != Status::Unexplored && node.status != s) {
                throw InternalError("region " + partition::to_string(node.id) + " inherited status " +
                                    partition::to_string(node.status) + " but classified " + partition::to_string(s));
            }
            forest->set_status(leaf, s);
        }

        ++v.iterations;
        rec.stats.iteration = forest->iteration();
        rec.stats.leaves = forest->leaves().size();
        rec.stats.winning = triple.winning.size();
        rec.stats.losing = triple.losing.size();
        rec.stats.maybe = triple.maybe.size();
        rec.stats.queries_issued = pair->stats.issued();
        rec.stats.queries_naive = pair->stats.naive;
        rec.stats.queries_saved = abstraction::reachability_queries_saved(*pair);
        rec.stats.pess_edges = pair->pess_edge_count();
        rec.stats.opt_edges = pair->opt_edge_count();
        rec.stats.edges_nested = pair->edges_nested();
        for (std::size_t leaf : forest->leaves()) {
            const auto& node = forest->node(leaf);
            rec.leaves.push_back({node.id, node.box, node.status, node.labels, node.initial});
        }
        const auto now = clock::now();
        rec.stats.wall_ms = std::chrono::duration<double, std::milli>(now - started).count();
        started = now;
        spdlog::debug("iteration {}: {} leaves, W={} M={} L={}, queries issued={} saved={}", rec.stats.iteration,
                      rec.stats.leaves, rec.stats.winning, rec.stats.maybe, rec.stats.losing, rec.stats.queries_issued,
                      rec.stats.queries_saved);
        if (!rec.stats.edges_nested) throw InternalError("pessimistic edges are not contained in optimistic edges");
        v.history.push_back(std::move(rec));

        bool all_winning = true;
        for (std::size_t leaf : forest->leaves()) {
            const auto& node = forest->node(leaf);
            if (!node.initial) continue;
            if (node.status != Status::Winning) all_winning = false;
            if (node.status == Status::Losing) v.witness.push_back(node.box.intersection(sys.initial_set));
        }
        if (!v.witness.empty()) {
            v.outcome = Outcome::Unrealizable;
            break;
        }
        if (all_winning) {
            v.outcome = Outcome::Realizable;
            v.controller = build_controller(*pair, *forest, ctx, triple);
            v.controller->problem_hash = io::problem_hash(problem);
            break;
        }
        if (v.iterations >= options.max_iters) {
            v.outcome = Outcome::Unknown;
            v.reason = "max_iters";
            break;
        }
        const bool splittable = std::all_of(triple.maybe.begin(), triple.maybe.end(), [&](const RegionId& id) {
            return forest->can_split(forest->find(id), m, options.min_cell);
        });
        if (!splittable) {
            v.outcome = Outcome::Unknown;
            v.reason = "min_cell";
            break;
        }
        forest->advance_iteration(triple.winning, triple.losing, triple.maybe, m);
        pair = std::make_shared<abstraction::AbstractionPair>(abstraction::refine(*pair, *forest, sys, options.threads));
    }
    spdlog::debug("verdict: {} after {} iterations", to_string(v.outcome), v.iterations);
    v.forest = forest;
    v.abstraction = pair;
    return v;
}

Execution simulate(const ContinuousController& controller, const geometry::ControlSystem& sys,
                   const std::vector<std::size_t>& env_trace, std::span<const double> s0, int steps) {
    if (steps < 0) throw std::invalid_argument("simulate: negative step count");
    const auto& a = controller.automaton;
    if (s0.size() != sys.state_dim()) throw std::invalid_argument("simulate: initial state has the wrong dimension");
    if (env_trace.empty() && a.envs != 1) throw std::invalid_argument("simulate: empty environment trace");
    for (std::size_t e : env_trace)
        if (e >= a.envs) throw std::invalid_argument("simulate: environment valuation out of range");
    if (!sys.initial_set.contains(s0, 1e-9)) {
        throw RefusalError("initial state is outside the initial set " + sys.initial_set.to_string());
    }
    std::int64_t state = -1;
    for (std::size_t idx : a.initial) {
        if (controller.boxes.at(a.states.at(idx).region).contains(s0, 1e-9)) {
            state = static_cast<std::int64_t>(idx);
            break;
        }
    }
    if (state < 0) throw RefusalError("initial state is outside the controller's winning region");

    Execution ex;
    geometry::Vector s(s0.begin(), s0.end());
    for (int t = 0;; ++t) {
        const std::size_t e = env_trace.empty() ? 0 : env_trace[std::min<std::size_t>(t, env_trace.size() - 1)];
        const auto& m = a.states[static_cast<std::size_t>(state)];
        ExecutionRow row{t, s, e, std::nullopt, controller.region_ids.at(m.region), static_cast<std::size_t>(state)};
        if (t == steps) {
            ex.rows.push_back(std::move(row));
            break;
        }
        const std::int64_t nxt = a.next[static_cast<std::size_t>(state)][e];
        if (nxt < 0) throw InternalError("strategy has no move at t=" + std::to_string(t));
        const geometry::Box& target = controller.boxes.at(a.states[static_cast<std::size_t>(nxt)].region);
        auto u = geometry::select_input(s, target, sys);
        if (!u) {
            throw InternalError("no input steers " + geometry::Box(s, s).to_string() + " into " + target.to_string() +
                                " although the abstraction has that pessimistic edge");
        }
        geometry::Vector s2 = sys.step(s, *u);
        if (!target.contains(s2, kLandingTolerance) || !sys.domain.contains(s2, kLandingTolerance)) {
            throw InternalError("state left its prescribed region at t=" + std::to_string(t + 1));
        }
        row.u = std::move(*u);
        ex.rows.push_back(std::move(row));
        s = std::move(s2);
        state = nxt;
    }
    return ex;
}

}  // namespace dualsynth::engine
