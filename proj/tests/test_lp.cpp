#include <random>
#include <stdexcept>

#include "doctest.h"
#include "lp.hpp"

using namespace dualsynth;

TEST_SUITE("lp") {

TEST_CASE("empty constraint set is feasible at the origin") {
    lp::Problem p;
    p.num_vars = 3;
    auto x = lp::find_feasible_point(p);
    REQUIRE(x);
    CHECK(x->size() == 3);
}

TEST_CASE("free variables may go negative") {
    lp::Problem p;
    p.num_vars = 1;
    p.add_bounds(0, -5.0, -4.0);
    auto x = lp::find_feasible_point(p);
    REQUIRE(x);
    CHECK((*x)[0] >= -5.0 - 1e-9);
    CHECK((*x)[0] <= -4.0 + 1e-9);
}

TEST_CASE("equalities and contradictions") {
    lp::Problem p;
    p.num_vars = 2;
    p.add_eq({1, 1}, 3);
    p.add_eq({1, -1}, 1);
    auto x = lp::find_feasible_point(p);
    REQUIRE(x);
    CHECK((*x)[0] == doctest::Approx(2.0));
    CHECK((*x)[1] == doctest::Approx(1.0));

    p.add_le({1, 0}, 1.5);
    CHECK_FALSE(lp::feasible(p));
}

TEST_CASE("degenerate single point box") {
    lp::Problem p;
    p.num_vars = 2;
    p.add_bounds(0, 0.5, 0.5);
    p.add_bounds(1, 0.5, 0.5);
    p.add_le({1, 1}, 1.0);
    CHECK(lp::feasible(p));
    p.add_le({-1, -1}, -1.0 - 1e-6);
    CHECK_FALSE(lp::feasible(p));
}

TEST_CASE("malformed rows are rejected") {
    lp::Problem p;
    p.num_vars = 2;
    p.constraints.push_back({{1.0}, lp::Relation::LessEqual, 0.0});
    CHECK_THROWS_AS(lp::feasible(p), std::invalid_argument);
}

// A box plus one half-space is feasible iff the minimum of the row over the
// box, which interval arithmetic gives exactly, is at most the rhs.
TEST_CASE("agrees with interval arithmetic on 1000 random instances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    int disagreements = 0;
    for (int k = 0; k < 1000; ++k) {
        lp::Problem p;
        p.num_vars = 3;
        std::vector<double> a(3);
        double min = 0.0;
        for (std::size_t d = 0; d < 3; ++d) {
            double lo = coef(rng), hi = coef(rng);
            if (lo > hi) std::swap(lo, hi);
            p.add_bounds(d, lo, hi);
            a[d] = coef(rng);
            min += std::min(a[d] * lo, a[d] * hi);
        }
        const double rhs = min + coef(rng);
        p.add_le(a, rhs);
        if (std::abs(rhs - min) < 1e-6) continue;
        const auto x = lp::find_feasible_point(p);
        if (x.has_value() != (min <= rhs)) ++disagreements;
        if (x) {
            double ax = 0.0;
            for (std::size_t d = 0; d < 3; ++d) ax += a[d] * (*x)[d];
            CHECK(ax <= rhs + 1e-7);
        }
    }
    CHECK(disagreements == 0);
}

}
