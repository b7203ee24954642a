#include "gr1.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include "errors.hpp"
#include "json.hpp"

namespace dualsynth::gr1 {

using formula::Expr;
using formula::ExprPtr;
using formula::Op;

namespace {

bool is_gf(const ExprPtr& e) { return e->op == Op::Always && e->args[0]->op == Op::Eventually; }

const char* first_temporal(const ExprPtr& e) {
    switch (e->op) {
        case Op::Next:
        case Op::Eventually:
        case Op::Always:
        case Op::Until:
        case Op::WeakUntil:
        case Op::Release: return formula::op_name(e->op);
        default: break;
    }
    for (const auto& a : e->args) {
        if (const char* op = first_temporal(a)) return op;
    }
    return nullptr;
}

// The operator that keeps `part` from matching GF phi or G(phi -> F psi).
std::string offending_operator(const ExprPtr& part) {
    if (part->op == Op::Always) {
        const ExprPtr& inner = part->args[0];
        const char* op = nullptr;
        if (inner->op == Op::Eventually) {
            op = first_temporal(inner->args[0]);
        } else if (inner->op == Op::Implies && inner->args[1]->op == Op::Eventually) {
            op = first_temporal(inner->args[0]);
            if (!op) op = first_temporal(inner->args[1]->args[0]);
        } else {
            op = first_temporal(inner);
        }
        return op ? op : "G";
    }
    const char* op = first_temporal(part);
    return op ? op : "?";
}

[[noreturn]] void unsupported(const ExprPtr& part) {
    throw InputError("unsupported operator '" + offending_operator(part) + "' in '" + formula::to_string(part) +
                     "'; expected GF phi, G(phi -> F psi) or a Boolean formula");
}

void split_and(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (e->op == Op::And) {
        split_and(e->args[0], out);
        split_and(e->args[1], out);
    } else {
        out.push_back(e);
    }
}

// A recurrence goal written either bare or as GF phi.
ExprPtr recurrence_body(const std::string& text) {
    ExprPtr e = formula::parse(text);
    if (is_gf(e)) e = e->args[0]->args[0];
    if (!formula::is_boolean(e)) unsupported(formula::parse(text));
    return e;
}

ExprPtr boolean_only(const std::string& text, const char* what) {
    ExprPtr e = formula::parse(text);
    if (!formula::is_boolean(e)) {
        throw InputError(std::string(what) + " '" + text + "' must be Boolean; found operator '" +
                         first_temporal(e) + "'");
    }
    return e;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            out += static_cast<char>(c);
        } else if (!out.empty() && out.back() != '_') {
            out += '_';
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "trigger" : out;
}

void add_response(Gr1Spec& spec, const ExprPtr& trigger, const ExprPtr& response) {
    const std::string base = "b_" + sanitize(formula::to_string(trigger));
    std::string name = base;
    for (int k = 2;; ++k) {
        const bool taken = std::any_of(spec.bits.begin(), spec.bits.end(), [&](const MemoryBit& b) { return b.name == name; });
        if (!taken) break;
        name = base + "_" + std::to_string(k);
    }
    spec.bits.push_back({name, trigger, response});
    spec.guarantees.push_back(formula::make_or(formula::make_not(formula::make_atom(name)), response));
}

void conjoin_init(Gr1Spec& spec, const ExprPtr& e) {
    spec.init = spec.init ? formula::make_and(spec.init, e) : e;
}

void decompose_ltl(Gr1Spec& spec, const std::string& text) {
    ExprPtr top = formula::parse(text);
    ExprPtr body = top;
    if (top->op == Op::Implies) {
        std::vector<ExprPtr> lhs;
        split_and(top->args[0], lhs);
        const bool all_gf = std::all_of(lhs.begin(), lhs.end(), [](const ExprPtr& p) {
            return is_gf(p) && formula::is_boolean(p->args[0]->args[0]);
        });
        if (all_gf) {
            for (const auto& p : lhs) spec.assumptions.push_back(p->args[0]->args[0]);
            body = top->args[1];
        }
    }
    std::vector<ExprPtr> parts;
    split_and(body, parts);
    for (const auto& part : parts) {
        if (formula::is_boolean(part)) {
            conjoin_init(spec, part);
        } else if (is_gf(part) && formula::is_boolean(part->args[0]->args[0])) {
            spec.guarantees.push_back(part->args[0]->args[0]);
        } else if (part->op == Op::Always && part->args[0]->op == Op::Implies &&
                   part->args[0]->args[1]->op == Op::Eventually && formula::is_boolean(part->args[0]->args[0]) &&
                   formula::is_boolean(part->args[0]->args[1]->args[0])) {
            add_response(spec, part->args[0]->args[0], part->args[0]->args[1]->args[0]);
        } else {
            unsupported(part);
        }
    }
}

}  // namespace

Gr1Spec convert_to_gr1(const RawSpec& raw) {
    Gr1Spec spec;
    if (!raw.init.empty()) spec.init = boolean_only(raw.init, "init");
    for (const auto& a : raw.assumptions) spec.assumptions.push_back(recurrence_body(a));
    for (const auto& g : raw.guarantees) spec.guarantees.push_back(recurrence_body(g));
    for (const auto& r : raw.responses) {
        add_response(spec, boolean_only(r.trigger, "response trigger"), boolean_only(r.response, "response"));
    }
    if (!raw.ltl.empty()) decompose_ltl(spec, raw.ltl);
    if (spec.guarantees.empty()) throw InputError("specification has no guarantees");
    return spec;
}

CompiledSpec compile_spec(const Gr1Spec& spec, const formula::Vocabulary& vocab) {
    formula::Vocabulary v = vocab;
    v.bits.clear();
    std::set<std::string> names;
    auto claim = [&](const std::string& n, const char* what) {
        if (!names.insert(n).second) throw InputError(std::string(what) + " name '" + n + "' is already in use");
    };
    for (const auto& l : v.labels) claim(l, "proposition");
    for (const auto& var : v.env.variables()) claim(var.name, "environment variable");
    for (const auto& b : spec.bits) {
        claim(b.name, "memory bit");
        v.bits.push_back(b.name);
    }
    if (spec.bits.size() > 16) throw InputError("at most 16 response obligations are supported");

    CompiledSpec out;
    out.bit_names = v.bits;
    out.init = formula::compile(spec.init, v, false);
    for (const auto& a : spec.assumptions) out.assumptions.push_back(formula::compile(a, v));
    for (const auto& g : spec.guarantees) out.guarantees.push_back(formula::compile(g, v));
    for (const auto& b : spec.bits) {
        out.triggers.push_back(formula::compile(b.trigger, v, false));
        out.responses.push_back(formula::compile(b.response, v, false));
    }
    return out;
}

GameGraph::GameGraph(std::size_t r, std::size_t e, std::size_t b, std::size_t m, std::size_t n)
    : regions(r), envs(e), bits(b) {
    if (envs == 0) throw std::invalid_argument("game needs at least one environment valuation");
    succ.assign(regions, {});
    assumption.assign(m, std::vector<char>(node_count(), 1));
    guarantee.assign(n, std::vector<char>(node_count(), 0));
    update.assign(memory_values() * regions * envs, 0);
}

void GameGraph::validate() const {
    if (envs == 0) throw std::invalid_argument("game needs at least one environment valuation");
    if (succ.size() != regions) throw std::invalid_argument("succ size differs from region count");
    if (guarantee.empty()) throw std::invalid_argument("game needs at least one guarantee");
    for (const auto& row : succ)
        for (auto t : row)
            if (t >= regions) throw std::invalid_argument("successor out of range");
    for (const auto& t : assumption)
        if (t.size() != node_count()) throw std::invalid_argument("assumption table has the wrong size");
    for (const auto& t : guarantee)
        if (t.size() != node_count()) throw std::invalid_argument("guarantee table has the wrong size");
    if (update.size() != memory_values() * regions * envs) throw std::invalid_argument("update table has the wrong size");
    for (auto u : update)
        if (u >= memory_values()) throw std::invalid_argument("update value out of range");
}

GameGraph make_game(const abstraction::Adjacency& succ, const std::vector<std::vector<char>>& region_labels,
                    const CompiledSpec& spec, std::size_t envs) {
    const std::size_t R = succ.size();
    if (region_labels.size() != R) throw std::invalid_argument("make_game: label table size differs from region count");
    GameGraph g(R, envs, spec.bit_names.size(), spec.assumptions.size(), spec.guarantees.size());
    g.succ = succ;
    const std::size_t B = g.bits;
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t e = 0; e < envs; ++e) {
            formula::Valuation val{&region_labels[r], e, 0};
            std::uint32_t set_mask = 0, clear_mask = 0;
            for (std::size_t k = 0; k < B; ++k) {
                if (spec.triggers[k].eval(val)) set_mask |= 1U << k;
                if (spec.responses[k].eval(val)) clear_mask |= 1U << k;
            }
            for (std::uint32_t b = 0; b < g.memory_values(); ++b) {
                g.update[(b * R + r) * envs + e] = (b | set_mask) & ~clear_mask;
                val.bits = b;
                const std::size_t v = g.node(r, e, b);
                for (std::size_t i = 0; i < spec.assumptions.size(); ++i) g.assumption[i][v] = spec.assumptions[i].eval(val);
                for (std::size_t j = 0; j < spec.guarantees.size(); ++j) g.guarantee[j][v] = spec.guarantees[j].eval(val);
            }
        }
    }
    return g;
}

void make_winning_sink(GameGraph& g, std::size_t region) {
    g.succ.at(region) = {static_cast<std::uint32_t>(region)};
    for (std::size_t e = 0; e < g.envs; ++e) {
        for (std::uint32_t b = 0; b < g.memory_values(); ++b) {
            const std::size_t v = g.node(region, e, b);
            for (auto& t : g.assumption) t[v] = 1;
            for (auto& t : g.guarantee) t[v] = 1;
        }
    }
}

namespace {

using Set = std::vector<char>;

// Nodes from which the system can force the next node into S.
Set cpre(const GameGraph& g, const Set& S) {
    Set out(g.node_count(), 0);
    const std::size_t MV = g.memory_values();
    for (std::size_t r = 0; r < g.regions; ++r) {
        for (std::uint32_t b = 0; b < MV; ++b) {
            bool ok = false;
            for (std::uint32_t t : g.succ[r]) {
                bool all = true;
                for (std::size_t e = 0; e < g.envs && all; ++e) all = S[g.node(t, e, g.next_bits(b, t, e))] != 0;
                if (all) {
                    ok = true;
                    break;
                }
            }
            if (!ok) continue;
            for (std::size_t e = 0; e < g.envs; ++e) out[g.node(r, e, b)] = 1;
        }
    }
    return out;
}

// Least fixpoint Y for guarantee j relative to Z. Fills ranks if asked:
// 0 for q_j nodes with a move into Z, ring * stride for Cpre(Y_{ring-1}),
// ring * stride + i + 1 for nodes held by violating assumption i.
Set reach_guarantee(const GameGraph& g, const Set& Z, std::size_t j, std::vector<std::uint32_t>* rank,
                    std::uint32_t stride) {
    const std::size_t n = g.node_count();
    const std::size_t M = g.assumption_count();
    const std::size_t rounds = std::max<std::size_t>(M, 1);
    const Set cz = cpre(g, Z);
    Set qstart(n, 0);
    for (std::size_t v = 0; v < n; ++v) qstart[v] = g.guarantee[j][v] && cz[v];

    Set Y(n, 0);
    if (rank) rank->assign(n, kUnranked);
    for (std::uint32_t ring = 1;; ++ring) {
        const Set cy = cpre(g, Y);
        Set start(n, 0);
        for (std::size_t v = 0; v < n; ++v) start[v] = qstart[v] || cy[v];
        Set next(n, 0);
        std::vector<Set> xs;
        for (std::size_t i = 0; i < rounds; ++i) {
            Set X = start;
            if (M > 0) {
                X.assign(n, 1);
                for (;;) {
                    const Set cx = cpre(g, X);
                    Set X2(n, 0);
                    for (std::size_t v = 0; v < n; ++v) X2[v] = start[v] || (!g.assumption[i][v] && cx[v]);
                    if (X2 == X) break;
                    X = std::move(X2);
                }
            }
            for (std::size_t v = 0; v < n; ++v) next[v] = next[v] || X[v];
            if (rank) xs.push_back(std::move(X));
        }
        if (rank) {
            for (std::size_t v = 0; v < n; ++v) {
                if (!next[v] || Y[v]) continue;
                if (qstart[v]) {
                    (*rank)[v] = 0;
                } else if (start[v]) {
                    (*rank)[v] = ring * stride;
                } else {
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                        if (xs[i][v]) {
                            (*rank)[v] = ring * stride + static_cast<std::uint32_t>(i) + 1;
                            break;
                        }
                    }
                }
            }
        }
        if (next == Y) break;
        Y = std::move(next);
    }
    return Y;
}

}  // namespace

Solution solve_game(const GameGraph& g) {
    g.validate();
    const std::size_t n = g.node_count();
    const std::size_t N = g.guarantee_count();
    Solution sol;
    sol.ring_stride = static_cast<std::uint32_t>(std::max<std::size_t>(g.assumption_count(), 1) + 1);

    Set Z(n, 1);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t j = 0; j < N; ++j) {
            Set Y = reach_guarantee(g, Z, j, nullptr, sol.ring_stride);
            if (Y != Z) {
                Z = std::move(Y);
                changed = true;
            }
        }
    }
    sol.winning = Z;
    sol.rank.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const Set Y = reach_guarantee(g, Z, j, &sol.rank[j], sol.ring_stride);
        if (Y != Z) throw InternalError("solve_game: guarantee fixpoint is not stable");
    }
    return sol;
}

std::optional<Step> strategy_step(const GameGraph& g, const Solution& sol, const MemoryState& m, std::size_t e) {
    if (m.region >= g.regions || e >= g.envs || m.counter >= g.guarantee_count()) {
        throw std::invalid_argument("strategy_step: memory state or input out of range");
    }
    const std::size_t v = g.node(m.region, e, g.next_bits(m.bits, m.region, e));
    if (!sol.winning[v]) return std::nullopt;
    std::uint32_t j = m.counter;
    if (g.guarantee[j][v]) j = static_cast<std::uint32_t>((j + 1) % g.guarantee_count());
    const auto& rank = sol.rank[j];
    const std::uint32_t b = g.bits_of(v);

    std::uint32_t best = kUnranked;
    std::uint32_t choice = 0;
    for (std::uint32_t t : g.succ[m.region]) {
        std::uint32_t worst = 0;
        for (std::size_t e2 = 0; e2 < g.envs && worst != kUnranked; ++e2) {
            worst = std::max(worst, rank[g.node(t, e2, g.next_bits(b, t, e2))]);
        }
        if (worst < best) {
            best = worst;
            choice = t;
        }
    }
    const std::uint32_t own = rank[v];
    const bool ok = best != kUnranked &&
                    (own == 0 || (own % sol.ring_stride == 0 ? best < own : best <= own));
    if (!ok) throw InternalError("strategy_step: no rank-decreasing move from a winning node");
    return Step{v, MemoryState{choice, b, j}};
}

std::int64_t StrategyAutomaton::find(const MemoryState& m) const {
    auto it = std::lower_bound(states.begin(), states.end(), m);
    if (it != states.end() && *it == m) return it - states.begin();
    return -1;
}

std::size_t StrategyAutomaton::transition_count() const {
    std::size_t n = 0;
    for (const auto& row : next)
        for (auto t : row) n += t >= 0;
    return n;
}

StrategyAutomaton extract_strategy(const GameGraph& g, const Solution& sol,
                                   const std::vector<std::uint32_t>& initial_regions) {
    std::map<MemoryState, std::vector<std::optional<MemoryState>>> seen;
    std::deque<MemoryState> queue;
    std::vector<MemoryState> roots;
    for (std::uint32_t r : initial_regions) {
        bool winning = true;
        for (std::size_t e = 0; e < g.envs; ++e) winning = winning && sol.winning[g.fresh_node(r, e)];
        if (!winning) continue;
        MemoryState m{r, 0, 0};
        roots.push_back(m);
        if (seen.emplace(m, std::vector<std::optional<MemoryState>>{}).second) queue.push_back(m);
    }
    while (!queue.empty()) {
        const MemoryState m = queue.front();
        queue.pop_front();
        std::vector<std::optional<MemoryState>> row(g.envs);
        for (std::size_t e = 0; e < g.envs; ++e) {
            if (auto step = strategy_step(g, sol, m, e)) {
                row[e] = step->next;
                if (seen.emplace(step->next, std::vector<std::optional<MemoryState>>{}).second)
                    queue.push_back(step->next);
            }
        }
        seen[m] = std::move(row);
    }
    StrategyAutomaton a;
    a.envs = g.envs;
    for (const auto& [m, row] : seen) a.states.push_back(m);
    for (const auto& [m, row] : seen) {
        std::vector<std::int64_t> out(g.envs, -1);
        std::vector<Letter> letters(g.envs);
        for (std::size_t e = 0; e < g.envs; ++e) {
            if (!row[e]) continue;
            out[e] = a.find(*row[e]);
            letters[e] = letter_of(g, g.node(m.region, e, g.next_bits(m.bits, m.region, e)));
        }
        a.next.push_back(std::move(out));
        a.letters.push_back(std::move(letters));
    }
    for (const auto& m : roots) a.initial.push_back(static_cast<std::size_t>(a.find(m)));
    return a;
}

bool strategy_invariance_check(const StrategyAutomaton& a, const GameGraph& g, const Solution& sol) {
    std::vector<char> visited(a.states.size(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t s : a.initial) {
        if (s >= a.states.size()) return false;
        if (!visited[s]) {
            visited[s] = 1;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const std::size_t s = queue.front();
        queue.pop_front();
        const MemoryState& m = a.states[s];
        if (m.region >= g.regions) return false;
        for (std::size_t e = 0; e < g.envs; ++e) {
            const std::size_t v = g.node(m.region, e, g.next_bits(m.bits, m.region, e));
            if (!sol.winning[v]) return false;
            const std::int64_t t = a.next[s][e];
            if (t < 0 || static_cast<std::size_t>(t) >= a.states.size()) return false;
            const MemoryState& n = a.states[static_cast<std::size_t>(t)];
            if (n.region >= g.regions) return false;
            if (!std::binary_search(g.succ[m.region].begin(), g.succ[m.region].end(), n.region)) return false;
            if (n.bits != g.bits_of(v)) return false;
            if (!visited[static_cast<std::size_t>(t)]) {
                visited[static_cast<std::size_t>(t)] = 1;
                queue.push_back(static_cast<std::size_t>(t));
            }
        }
    }
    return true;
}

bool check_lasso(const std::vector<Letter>& prefix, const std::vector<Letter>& cycle) {
    (void)prefix;  // acceptance depends on the cycle alone
    if (cycle.empty()) throw std::invalid_argument("check_lasso: empty cycle");
    const std::size_t M = cycle.front().p.size();
    const std::size_t N = cycle.front().q.size();
    for (std::size_t i = 0; i < M; ++i) {
        const bool seen = std::any_of(cycle.begin(), cycle.end(), [&](const Letter& l) { return l.p[i]; });
        if (!seen) return true;
    }
    for (std::size_t j = 0; j < N; ++j) {
        const bool seen = std::any_of(cycle.begin(), cycle.end(), [&](const Letter& l) { return l.q[j]; });
        if (!seen) return false;
    }
    return true;
}

Letter letter_of(const GameGraph& g, std::size_t node) {
    Letter l;
    for (const auto& t : g.assumption) l.p.push_back(t.at(node));
    for (const auto& t : g.guarantee) l.q.push_back(t.at(node));
    return l;
}

std::string strategy_json(const StrategyAutomaton& a, const std::vector<std::string>& region_names,
                          const std::vector<std::string>& env_names) {
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t s = 0; s < a.states.size(); ++s) {
        const auto& m = a.states[s];
        states.push_back({{"id", s}, {"region", region_names.at(m.region)}, {"bits", m.bits}, {"counter", m.counter}});
    }
    nlohmann::json transitions = nlohmann::json::array();
    for (std::size_t s = 0; s < a.states.size(); ++s) {
        for (std::size_t e = 0; e < a.envs; ++e) {
            const std::int64_t t = a.next[s][e];
            if (t < 0) continue;
            nlohmann::json tr = {{"memory", s},
                                 {"env", env_names.at(e)},
                                 {"next_memory", t},
                                 {"next_state", region_names.at(a.states[static_cast<std::size_t>(t)].region)}};
            if (s < a.letters.size()) {
                tr["p"] = std::vector<bool>(a.letters[s][e].p.begin(), a.letters[s][e].p.end());
                tr["q"] = std::vector<bool>(a.letters[s][e].q.begin(), a.letters[s][e].q.end());
            }
            transitions.push_back(std::move(tr));
        }
    }
    nlohmann::json doc = {{"memory_states", std::move(states)},
                          {"initial", a.initial},
                          {"transitions", std::move(transitions)}};
    return doc.dump(2);
}

}  // namespace dualsynth::gr1
