#pragma once

// Independent oracles and random-instance generators shared by the unit tests
// and the acceptance binary. Nothing here calls into the code under test except
// to build inputs or read results.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "engine.hpp"
#include "geometry.hpp"
#include "gr1.hpp"

namespace dualsynth::testing {

using geometry::Box;

inline std::string problems_dir() { return DUALSYNTH_PROBLEMS_DIR; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Box random_box(std::mt19937_64& rng, double lo, double hi, double min_side, double max_side) {
    geometry::Vector a(2), b(2);
    for (int d = 0; d < 2; ++d) {
        const double side = uniform(rng, min_side, max_side);
        a[d] = uniform(rng, lo, hi - side);
        b[d] = a[d] + side;
    }
    return {a, b};
}

// ---------------------------------------------------------------------------
// Dense grid sampling for the one-step reachability relations (2-D state,
// 2-D input). Grids include the box corners.

struct Affine2 {
    double A[2][2];
    double B[2][2];
    Box U;
    Box dom;
};

inline Affine2 to_affine2(const geometry::ControlSystem& sys) {
    Affine2 f{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            f.A[r][c] = sys.A(r, c);
            f.B[r][c] = sys.B(r, c);
        }
    f.U = sys.input_set;
    f.dom = sys.domain;
    return f;
}

inline std::vector<std::array<double, 2>> grid_points(const Box& b, int res) {
    std::vector<std::array<double, 2>> out;
    out.reserve(static_cast<std::size_t>(res * res));
    for (int i = 0; i < res; ++i) {
        const double x = b.lower(0) + b.side(0) * i / (res - 1);
        for (int j = 0; j < res; ++j) out.push_back({x, b.lower(1) + b.side(1) * j / (res - 1)});
    }
    return out;
}

// Vertices first, so that a failing corner ends the universal check early.
inline std::vector<std::array<double, 2>> grid_points_corners_first(const Box& b, int res) {
    auto pts = grid_points(b, res);
    std::stable_partition(pts.begin(), pts.end(), [&](const std::array<double, 2>& p) {
        return (p[0] == b.lower(0) || p[0] == b.upper(0)) && (p[1] == b.lower(1) || p[1] == b.upper(1));
    });
    return pts;
}

class GridOracle {
public:
    GridOracle(const Affine2& f, const Box& to, int u_res) : f_(f) {
        const Box t = to.intersection(f.dom);
        empty_ = t.empty();
        if (!empty_) {
            lo_ = {t.lower(0) - kTol, t.lower(1) - kTol};
            hi_ = {t.upper(0) + kTol, t.upper(1) + kTol};
        }
        for (const auto& u : grid_points(f.U, u_res))
            bu_.push_back({f.B[0][0] * u[0] + f.B[0][1] * u[1], f.B[1][0] * u[0] + f.B[1][1] * u[1]});
    }

    bool from_point(const std::array<double, 2>& x) const {
        if (empty_) return false;
        const double ax0 = f_.A[0][0] * x[0] + f_.A[0][1] * x[1];
        const double ax1 = f_.A[1][0] * x[0] + f_.A[1][1] * x[1];
        for (const auto& bu : bu_) {
            const double y0 = ax0 + bu[0];
            const double y1 = ax1 + bu[1];
            if (y0 >= lo_[0] && y0 <= hi_[0] && y1 >= lo_[1] && y1 <= hi_[1]) return true;
        }
        return false;
    }

    bool exists(const Box& from, int x_res) const {
        for (const auto& x : grid_points(from, x_res))
            if (from_point(x)) return true;
        return false;
    }

    bool forall(const Box& from, int x_res) const {
        for (const auto& x : grid_points_corners_first(from, x_res))
            if (!from_point(x)) return false;
        return true;
    }

private:
    static constexpr double kTol = 1e-12;
    Affine2 f_;
    bool empty_ = false;
    std::array<double, 2> lo_{}, hi_{};
    std::vector<std::array<double, 2>> bu_;
};

// ---------------------------------------------------------------------------
// Backward reachability for identity dynamics s' = s + u, exact in boxes.
// With 0 in U the predecessor of a box contains it, so the set of states that
// can reach `goal` in finitely many steps is a single box, and (since a state
// in goal can stay there) it is also the set that can visit goal infinitely
// often.

inline Box identity_backward_reach(const Box& goal, const Box& U, const Box& dom) {
    for (std::size_t d = 0; d < U.dim(); ++d) {
        if (U.lower(d) > 0.0 || U.upper(d) < 0.0) throw std::invalid_argument("oracle needs 0 in U");
    }
    Box y = goal.intersection(dom);
    for (int k = 0; k < 100000; ++k) {
        geometry::Vector lo(y.dim()), hi(y.dim());
        for (std::size_t d = 0; d < y.dim(); ++d) {
            lo[d] = std::max(dom.lower(d), y.lower(d) - U.upper(d));
            hi[d] = std::min(dom.upper(d), y.upper(d) - U.lower(d));
        }
        Box next(lo, hi);
        if (next == y) return y;
        y = next;
    }
    throw std::runtime_error("backward reachability did not converge");
}

// ---------------------------------------------------------------------------
// GR(1) brute force. Enumerates every strategy that is positional in
// (region, env, counter) and evaluates it by cycle analysis on the product.
// With at most one assumption the winning condition on the product is a Rabin
// condition, for which positional strategies suffice, so the enumeration is
// complete. Memory bits are not supported (bits == 0).

class BruteForceGr1 {
public:
    explicit BruteForceGr1(const gr1::GameGraph& g) : g_(g) {
        if (g.bits != 0) throw std::invalid_argument("brute force: memory bits not supported");
        if (g.assumption_count() > 1) throw std::invalid_argument("brute force: at most one assumption");
        N_ = g.guarantee_count();
        S_ = g.regions * g.envs * N_;
        if (S_ > 32) throw std::invalid_argument("brute force: product too large");
    }

    std::uint64_t strategy_count() const {
        std::uint64_t c = 1;
        for (std::size_t r = 0; r < g_.regions; ++r)
            for (std::size_t k = 0; k < g_.envs * N_; ++k) c *= std::max<std::size_t>(1, g_.succ[r].size());
        return c;
    }

    /// winning[r * envs + e]: some strategy wins every play starting at (r, e)
    /// with counter 0.
    std::vector<char> winning() const {
        const std::size_t R = g_.regions, E = g_.envs;
        std::vector<char> win(R * E, 0);
        std::vector<std::size_t> choice(S_, 0);  // index into succ[r] per product state
        for (;;) {
            const std::uint32_t bad = bad_states(choice);
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t e = 0; e < E; ++e)
                    if (!(bad >> state(r, e, 0) & 1u)) win[r * E + e] = 1;
            // mixed-radix increment
            std::size_t k = 0;
            for (; k < S_; ++k) {
                const std::size_t radix = std::max<std::size_t>(1, g_.succ[k / (E * N_)].size());
                if (++choice[k] < radix) break;
                choice[k] = 0;
            }
            if (k == S_) break;
        }
        return win;
    }

private:
    std::size_t state(std::size_t r, std::size_t e, std::size_t j) const { return (r * g_.envs + e) * N_ + j; }

    bool q(std::size_t j, std::size_t r, std::size_t e) const { return g_.guarantee[j][g_.node(r, e, 0)] != 0; }
    bool p(std::size_t r, std::size_t e) const {
        return g_.assumption_count() == 0 || g_.assumption[0][g_.node(r, e, 0)] != 0;
    }

    static std::vector<std::uint32_t> closure(std::vector<std::uint32_t> reach) {
        const std::size_t n = reach.size();
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (reach[i] >> k & 1u) reach[i] |= reach[k];
        return reach;
    }

    // Product states from which the environment can force a loss under `choice`.
    std::uint32_t bad_states(const std::vector<std::size_t>& choice) const {
        const std::size_t R = g_.regions, E = g_.envs;
        std::vector<std::uint32_t> edge(S_, 0);
        std::uint32_t dead = 0;
        std::vector<std::uint32_t> stay(N_, 0);  // states where the counter stays at j
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t e = 0; e < E; ++e)
                for (std::size_t j = 0; j < N_; ++j) {
                    const std::size_t s = state(r, e, j);
                    const bool advance = q(j, r, e);
                    if (!advance) stay[j] |= 1u << s;
                    if (g_.succ[r].empty()) {
                        dead |= 1u << s;
                        continue;
                    }
                    const std::size_t jp = advance ? (j + 1) % N_ : j;
                    // the choice is indexed by the counter after the visit
                    const std::size_t rn = g_.succ[r][choice[state(r, e, jp)]];
                    for (std::size_t en = 0; en < E; ++en) edge[s] |= 1u << state(rn, en, jp);
                }
        std::uint32_t core = dead;
        for (std::size_t j = 0; j < N_; ++j) {
            std::vector<std::uint32_t> sub(S_, 0);
            for (std::size_t s = 0; s < S_; ++s)
                if (stay[j] >> s & 1u) sub[s] = edge[s] & stay[j];
            const auto reach = closure(sub);
            for (std::size_t s = 0; s < S_; ++s) {
                const std::size_t r = s / (E * N_), e = (s / N_) % E;
                if ((stay[j] >> s & 1u) && (reach[s] >> s & 1u) && p(r, e)) core |= 1u << s;
            }
        }
        const auto reach = closure(edge);
        std::uint32_t bad = core;
        for (std::size_t s = 0; s < S_; ++s)
            if (reach[s] & core) bad |= 1u << s;
        return bad;
    }

    const gr1::GameGraph& g_;
    std::size_t N_ = 0;
    std::size_t S_ = 0;
};

/// Random game: at most 8 (region, env) pairs, <= 2 env values, 1-2
/// guarantees, 0-1 assumptions, and at most `max_strategies` positional
/// strategies so that brute force stays cheap.
inline gr1::GameGraph random_game(std::mt19937_64& rng, std::uint64_t max_strategies = 1u << 14) {
    for (;;) {
        const std::size_t E = static_cast<std::size_t>(uniform_int(rng, 1, 2));
        const std::size_t R = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(8 / E)));
        const std::size_t N = static_cast<std::size_t>(uniform_int(rng, 1, 2));
        const std::size_t M = static_cast<std::size_t>(uniform_int(rng, 0, 1));
        gr1::GameGraph g(R, E, 0, M, N);
        for (std::size_t r = 0; r < R; ++r) {
            const int deg = uniform_int(rng, 0, 4) == 0 ? 0 : uniform_int(rng, 1, 3);
            std::vector<std::uint32_t> s;
            for (int k = 0; k < deg; ++k) s.push_back(static_cast<std::uint32_t>(uniform_int(rng, 0, static_cast<int>(R) - 1)));
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            g.succ[r] = s;
        }
        for (auto& row : g.guarantee)
            for (auto& v : row) v = uniform_int(rng, 0, 2) == 0;
        for (auto& row : g.assumption)
            for (auto& v : row) v = uniform_int(rng, 0, 1);
        std::uint64_t count = 1;
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t k = 0; k < E * N; ++k) count *= std::max<std::size_t>(1, g.succ[r].size());
        if (count <= max_strategies) return g;
    }
}

// ---------------------------------------------------------------------------
// Random 2-D synthesis problems on [0,4]^2 with coordinates on a 0.5 grid.

inline engine::Problem random_problem(std::mt19937_64& rng) {
    engine::Problem p;
    auto& sys = p.sys;
    const bool identity = uniform_int(rng, 0, 2) == 0;
    sys.A = geometry::Matrix::identity(2);
    if (!identity) {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) sys.A(r, c) += uniform(rng, -0.15, 0.15);
    }
    sys.B = geometry::Matrix::identity(2);
    const double gain = uniform(rng, 0.6, 1.2);
    for (int r = 0; r < 2; ++r) sys.B(r, r) = gain;
    const double ulo = uniform_int(rng, 0, 3) == 0 ? 0.0 : -1.0;
    sys.input_set = Box({ulo, ulo}, {1.0, 1.0});
    sys.domain = Box({0.0, 0.0}, {4.0, 4.0});
    auto grid_box = [&](int max_cells) {
        geometry::Vector lo(2), hi(2);
        for (int d = 0; d < 2; ++d) {
            const int w = uniform_int(rng, 1, max_cells);
            const int a = uniform_int(rng, 0, 8 - w);
            lo[d] = 0.5 * a;
            hi[d] = 0.5 * (a + w);
        }
        return Box(lo, hi);
    };
    sys.propositions.push_back({"goal", grid_box(3)});
    const bool with_env = uniform_int(rng, 0, 1) == 1;
    if (with_env) sys.propositions.push_back({"aux", grid_box(3)});
    sys.initial_set = grid_box(4);
    p.spec.guarantees = {"goal"};
    if (with_env) {
        p.env = abstraction::EnvAlphabet({{"req", {"false", "true"}}});
        p.spec.responses.push_back({"req", "aux"});
    }
    p.options.m = 4;
    p.options.max_iters = 3;
    return p;
}

// ---------------------------------------------------------------------------
// Set comparisons by box coverage. Partitions at consecutive iterations are
// nested, so a leaf of iteration i is covered exactly by the leaves of
// iteration i+1 contained in it.

inline double covered_volume(const Box& b, const std::vector<Box>& pieces) {
    double v = 0.0;
    for (const auto& q : pieces)
        if (b.contains(q, 1e-12)) v += q.volume();
    return v;
}

inline std::vector<Box> boxes_with(const engine::IterationRecord& rec, partition::Status s) {
    std::vector<Box> out;
    for (const auto& l : rec.leaves)
        if (l.status == s) out.push_back(l.box);
    return out;
}

/// Every box of `before` is covered by boxes of `after`, by volume.
inline bool volume_subset(const std::vector<Box>& before, const std::vector<Box>& after) {
    for (const auto& b : before) {
        const double v = covered_volume(b, after);
        if (std::abs(v - b.volume()) > 1e-9 * std::max(1.0, b.volume())) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Environment scripts for closed-loop simulation. Every script is periodic,
// so the discrete run is ultimately periodic in (memory state, phase).

struct EnvScript {
    std::string name;
    std::vector<std::size_t> pattern;
};

inline std::vector<EnvScript> env_scripts(std::size_t env_count, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<EnvScript> out;
    for (std::size_t e = 0; e < env_count && out.size() < count; ++e) out.push_back({"constant " + std::to_string(e), {e}});
    if (env_count > 1) {
        std::vector<std::size_t> alt;
        for (std::size_t e = 0; e < env_count; ++e) alt.push_back(e);
        out.push_back({"alternating", alt});
        // long quiet stretches broken by single requests
        for (int period : {7, 50, 333}) {
            std::vector<std::size_t> burst(static_cast<std::size_t>(period), 0);
            burst.back() = env_count - 1;
            out.push_back({"burst " + std::to_string(period), burst});
        }
    }
    while (out.size() < count) {
        const int period = uniform_int(rng, 1, 200);
        std::vector<std::size_t> pattern(static_cast<std::size_t>(period));
        for (auto& v : pattern) v = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(env_count) - 1));
        out.push_back({"random period " + std::to_string(period), pattern});
    }
    out.resize(count);
    return out;
}

}  // namespace dualsynth::testing
