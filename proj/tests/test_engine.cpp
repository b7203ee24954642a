#include <random>

#include "doctest.h"
#include "engine.hpp"
#include "errors.hpp"
#include "problem_io.hpp"
#include "support.hpp"

using namespace dualsynth;
using engine::Outcome;

namespace {

engine::Problem load(const std::string& name) { return io::load_problem_file(testing::problems_dir() + "/" + name); }

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("park problem is realizable with a controller over the winning regions") {
    const auto p = load("park.json");
    const auto v = engine::run(p, p.options);
    REQUIRE(v.outcome == Outcome::Realizable);
    REQUIRE(v.controller);
    CHECK(v.controller->problem_hash == io::problem_hash(p));
    CHECK(v.controller->env_names == std::vector<std::string>{"park=false", "park=true"});
    CHECK(v.witness.empty());
    CHECK(v.history.size() == static_cast<std::size_t>(v.iterations));
    CHECK(v.history.back().stats.losing == 0);
}

TEST_CASE("monotone invariant problem is unrealizable with the start box as witness") {
    const auto p = load("invariant_monotone.json");
    const auto v = engine::run(p, p.options);
    REQUIRE(v.outcome == Outcome::Unrealizable);
    REQUIRE(v.witness.size() == 1);
    CHECK(v.witness[0] == geometry::Box({3, 3}, {3.5, 3.5}));
    CHECK_FALSE(v.controller);
    // only the goal cell can keep returning to the goal
    CHECK(v.history.back().stats.winning == 1);
}

TEST_CASE("budgets end in unknown") {
    const auto p = load("invariant.json");
    auto opts = p.options;
    opts.max_iters = 1;
    auto v = engine::run(p, opts);
    CHECK(v.outcome == Outcome::Unknown);
    CHECK(v.reason == "max_iters");
    opts.max_iters = 20;
    opts.min_cell = 0.4;
    v = engine::run(p, opts);
    CHECK(v.outcome == Outcome::Unknown);
    CHECK(v.reason == "min_cell");
}

TEST_CASE("options and init are validated") {
    auto p = load("park.json");
    auto opts = p.options;
    opts.m = 1;
    CHECK_THROWS_AS(engine::run(p, opts), InputError);
    opts = p.options;
    opts.max_iters = 0;
    CHECK_THROWS_AS(engine::run(p, opts), InputError);
    p.spec.init = "home";
    CHECK_THROWS_WITH_AS(engine::run(p, p.options), doctest::Contains("does not satisfy init"), InputError);
}

TEST_CASE("odd split factors still decide") {
    const auto p = load("invariant.json");
    auto opts = p.options;
    opts.m = 3;
    const auto v = engine::run(p, opts);
    CHECK(v.outcome == Outcome::Realizable);
}

TEST_CASE("seeded classification matches from-scratch solving") {
    const auto p = load("invariant.json");
    auto opts = p.options;
    opts.rebuild_check = true;
    const auto v = engine::run(p, opts);
    CHECK(v.outcome == Outcome::Realizable);
    for (const auto& rec : v.history) CHECK(rec.stats.rebuild_checked);
}

TEST_CASE("statuses only grow between iterations") {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 5; ++k) {
        const auto p = testing::random_problem(rng);
        const auto v = engine::run(p, p.options);
        for (std::size_t i = 0; i + 1 < v.history.size(); ++i) {
            const auto& a = v.history[i];
            const auto& b = v.history[i + 1];
            CHECK(testing::volume_subset(testing::boxes_with(a, partition::Status::Winning),
                                         testing::boxes_with(b, partition::Status::Winning)));
            CHECK(testing::volume_subset(testing::boxes_with(a, partition::Status::Losing),
                                         testing::boxes_with(b, partition::Status::Losing)));
        }
    }
}

TEST_CASE("simulation follows the strategy and refuses outside its region") {
    const auto p = load("park.json");
    const auto v = engine::run(p, p.options);
    REQUIRE(v.controller);
    const std::vector<double> s0{1.5, 1.0};
    const auto ex = engine::simulate(*v.controller, p.sys, {1, 0, 0, 1}, s0, 40);
    REQUIRE(ex.rows.size() == 41);
    CHECK_FALSE(ex.rows.back().u);
    bool home = false;
    for (const auto& row : ex.rows) {
        CHECK(p.sys.domain.contains(row.s, engine::kLandingTolerance));
        if (row.u) CHECK(p.sys.input_set.contains(*row.u));
        home = home || p.sys.propositions[0].region.contains(row.s, 1e-9);
    }
    CHECK(home);
    const std::vector<double> outside{3.5, 1.0};
    CHECK_THROWS_AS(engine::simulate(*v.controller, p.sys, {0}, outside, 5), RefusalError);
    CHECK_THROWS_AS(engine::simulate(*v.controller, p.sys, {0}, std::vector<double>{2.0}, 5), std::invalid_argument);
    CHECK_THROWS_AS(engine::simulate(*v.controller, p.sys, {2}, s0, 5), std::invalid_argument);

    const auto q = load("invariant.json");
    const auto w = engine::run(q, q.options);
    REQUIRE(w.controller);
    CHECK_THROWS_AS(engine::simulate(*w.controller, q.sys, {0}, std::vector<double>{1.0, 1.0}, 5), RefusalError);
}

}
