#include "abstraction.hpp"
#include "doctest.h"
#include "json.hpp"
#include "problem_io.hpp"
#include "support.hpp"

using namespace dualsynth;
using partition::PartitionForest;
using partition::Status;

TEST_SUITE("abstraction") {

TEST_CASE("environment alphabet enumerates valuations, first variable fastest") {
    abstraction::EnvAlphabet env({{"a", {"0", "1"}}, {"b", {"x", "y", "z"}}});
    CHECK(env.size() == 6);
    CHECK(env.value(1, 0) == "1");
    CHECK(env.value(1, 1) == "x");
    CHECK(env.value_index(5, 1) == 2);
    CHECK(env.encode({1, 2}) == 5);
    CHECK(env.describe(5) == "a=1,b=z");
    abstraction::EnvAlphabet none;
    CHECK(none.size() == 1);
    CHECK(none.describe(0) == "-");
}

TEST_CASE("initial pair matches direct reachability queries") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/park.json");
    const auto f = PartitionForest::initial(p.sys);
    const auto pair = abstraction::build_initial(f, p.sys);
    const std::size_t L = pair.region_count();
    REQUIRE(L == 6);
    for (std::uint32_t a = 0; a < L; ++a)
        for (std::uint32_t b = 0; b < L; ++b) {
            const auto& x = f.node(pair.regions[a]).box;
            const auto& y = f.node(pair.regions[b]).box;
            const bool rp = geometry::reach_pessimistic(x, y, p.sys);
            CHECK(pair.has_pess(a, b) == rp);
            CHECK(pair.has_opt(a, b) == (rp || geometry::reach_optimistic_interior(x, y, p.sys)));
        }
    CHECK(pair.edges_nested());
    CHECK(pair.stats.naive == 2 * L * L);
    CHECK(pair.stats.pessimistic == L * L);
    CHECK(abstraction::reachability_queries_saved(pair) == pair.stats.naive - pair.stats.issued());
    // unit cells with |u| <= 1: every cell reaches itself and its 8-neighbours
    CHECK(pair.has_pess(0, 4));
    CHECK_FALSE(pair.has_pess(0, 2));
}

TEST_CASE("threads do not change the result") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/invariant.json");
    const auto f = PartitionForest::initial(p.sys);
    const auto one = abstraction::build_initial(f, p.sys, 1);
    const auto four = abstraction::build_initial(f, p.sys, 4);
    CHECK(one.pess == four.pess);
    CHECK(one.opt == four.opt);
}

TEST_CASE("refinement copies WW edges and drops losing regions") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/invariant.json");
    auto f = PartitionForest::initial(p.sys);
    const auto pair0 = abstraction::build_initial(f, p.sys);
    // declare the goal cell winning, the far corner losing, everything else maybe
    std::set<partition::RegionId> w, l, m;
    for (auto leaf : f.leaves()) {
        const auto& n = f.node(leaf);
        if (n.box.lower(0) == 0 && n.box.lower(1) == 0) w.insert(n.id);
        else if (n.box.lower(0) == 3.5 && n.box.lower(1) == 3.5) l.insert(n.id);
        else m.insert(n.id);
    }
    REQUIRE(w.size() == 1);
    REQUIRE(l.size() == 1);
    f.advance_iteration(w, l, m, 4);
    const auto pair1 = abstraction::refine(pair0, f, p.sys);
    CHECK(pair1.edges_nested());
    CHECK(pair1.region_count() == 2 + 4 * m.size());

    std::uint32_t goal = 0, lost = 0;
    for (std::uint32_t k = 0; k < pair1.region_count(); ++k) {
        const auto& n = f.node(pair1.regions[k]);
        if (n.status == Status::Winning) goal = k;
        if (n.status == Status::Losing) lost = k;
    }
    CHECK(pair1.has_pess(goal, goal));
    CHECK(pair1.has_opt(goal, goal));
    CHECK(pair1.pess[lost].empty());
    CHECK(pair1.opt[lost].empty());
    for (std::uint32_t k = 0; k < pair1.region_count(); ++k) {
        CHECK_FALSE(pair1.has_opt(k, lost));
        if (k == goal) continue;
        const auto& x = f.node(pair1.regions[k]).box;
        if (f.node(pair1.regions[k]).status == Status::Losing) continue;
        // maybe children to the winning pass-through are recomputed
        CHECK(pair1.has_pess(k, goal) == geometry::reach_pessimistic(x, f.node(pair1.regions[goal]).box, p.sys));
    }
    CHECK(pair1.stats.issued() < pair1.stats.naive);
}

TEST_CASE("fts export lists states per region and environment") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/park.json");
    const auto f = PartitionForest::initial(p.sys);
    const auto pair = abstraction::build_initial(f, p.sys);
    const auto j = nlohmann::json::parse(abstraction::fts_json(pair, f, p.env));
    CHECK(j["states"].size() == 12);
    CHECK(j["initial"].size() == 12);
    CHECK(j["pess_edges"].size() == pair.pess_edge_count() * 4);
    const auto dot = abstraction::fts_dot(pair, f, p.env);
    CHECK(dot.find("digraph") != std::string::npos);
}

}
