#include "doctest.h"
#include "errors.hpp"
#include "formula.hpp"
#include "gr1.hpp"

using namespace dualsynth;
using formula::Op;

namespace {

formula::Vocabulary park_vocab() {
    formula::Vocabulary v;
    v.labels = {"home", "lot"};
    v.env = abstraction::EnvAlphabet({{"park", {"false", "true"}}, {"mode", {"a", "b", "c"}}});
    return v;
}

}  // namespace

TEST_SUITE("formula") {

TEST_CASE("precedence: not binds tighter than and, and tighter than or, implication last") {
    const auto e = formula::parse("!a & b | c -> d");
    REQUIRE(e->op == Op::Implies);
    CHECK(e->args[0]->op == Op::Or);
    CHECK(e->args[0]->args[0]->op == Op::And);
    CHECK(e->args[0]->args[0]->args[0]->op == Op::Not);
}

TEST_CASE("ascii and unicode spellings agree") {
    CHECK(formula::to_string(formula::parse("[]<>home & [](park -> <>lot)")) ==
          formula::to_string(formula::parse("□◇home ∧ □(park → ◇lot)")));
    CHECK(formula::to_string(formula::parse("G F home")) == formula::to_string(formula::parse("[]<>home")));
    CHECK(formula::to_string(formula::parse("a <-> b")) == formula::to_string(formula::parse("a ↔ b")));
}

TEST_CASE("printing round-trips") {
    for (const char* s : {"a & (b | !c)", "G (a -> F b)", "x=1 | y", "a U (b R c)", "X a W b", "true & !false"}) {
        const auto once = formula::to_string(formula::parse(s));
        CHECK(formula::to_string(formula::parse(once)) == once);
    }
}

TEST_CASE("syntax errors carry the column") {
    CHECK_THROWS_WITH_AS(formula::parse("a & "), doctest::Contains("column 5"), InputError);
    CHECK_THROWS_WITH_AS(formula::parse("a # b"), doctest::Contains("column 3"), InputError);
    CHECK_THROWS_WITH_AS(formula::parse("(a | b"), doctest::Contains("expected ')'"), InputError);
    CHECK_THROWS_AS(formula::parse("mode="), InputError);
    CHECK_THROWS_AS(formula::parse("1a"), InputError);
}

TEST_CASE("temporal detection") {
    CHECK(formula::is_boolean(formula::parse("a & !b")));
    CHECK_FALSE(formula::is_boolean(formula::parse("a & X b")));
}

TEST_CASE("compiled predicates evaluate labels, env values and bits") {
    auto vocab = park_vocab();
    vocab.bits = {"b0"};
    const std::vector<char> at_home{1, 0};
    const auto p = formula::compile(formula::parse("home & park & mode=c & !b0"), vocab);
    const std::size_t e = vocab.env.encode({1, 2});
    CHECK(p.eval({&at_home, e, 0}));
    CHECK_FALSE(p.eval({&at_home, e, 1}));
    CHECK_FALSE(p.eval({&at_home, vocab.env.encode({0, 2}), 0}));
    CHECK(p.uses_bits());
}

TEST_CASE("compile rejects unknown names and misused values") {
    const auto vocab = park_vocab();
    CHECK_THROWS_WITH_AS(formula::compile(formula::parse("garage"), vocab), doctest::Contains("unknown name 'garage'"),
                         InputError);
    CHECK_THROWS_WITH_AS(formula::compile(formula::parse("mode"), vocab), doctest::Contains("not Boolean"), InputError);
    CHECK_THROWS_AS(formula::compile(formula::parse("mode=d"), vocab), InputError);
    CHECK_THROWS_AS(formula::compile(formula::parse("home=1"), vocab), InputError);
    CHECK_THROWS_AS(formula::compile(formula::parse("F home"), vocab), InputError);
}

TEST_CASE("responses become memory bits") {
    gr1::RawSpec raw;
    raw.guarantees = {"home"};
    raw.responses = {{"park", "lot"}, {"park", "home"}};
    const auto spec = gr1::convert_to_gr1(raw);
    REQUIRE(spec.bits.size() == 2);
    CHECK(spec.bits[0].name == "b_park");
    CHECK(spec.bits[1].name == "b_park_2");
    // one GF per guarantee plus one "bit clear" recurrence per response
    CHECK(spec.guarantees.size() == 3);
}

TEST_CASE("ltl text is split into recognised conjuncts") {
    gr1::RawSpec raw;
    raw.ltl = "[]<>home & [](park -> <>lot)";
    const auto spec = gr1::convert_to_gr1(raw);
    CHECK(spec.bits.size() == 1);
    CHECK(spec.guarantees.size() == 2);
}

TEST_CASE("unsupported ltl names the offending operator") {
    gr1::RawSpec raw;
    raw.ltl = "[]<>home & [](park -> X lot)";
    CHECK_THROWS_WITH_AS(gr1::convert_to_gr1(raw), doctest::Contains("unsupported operator 'X'"), InputError);
    raw.ltl = "home U lot";
    CHECK_THROWS_WITH_AS(gr1::convert_to_gr1(raw), doctest::Contains("'U'"), InputError);
    gr1::RawSpec empty;
    CHECK_THROWS_WITH_AS(gr1::convert_to_gr1(empty), doctest::Contains("no guarantees"), InputError);
}

TEST_CASE("compile_spec rejects name clashes") {
    gr1::RawSpec raw;
    raw.guarantees = {"home"};
    raw.responses = {{"park", "lot"}};
    auto vocab = park_vocab();
    vocab.labels.push_back("b_park");
    CHECK_THROWS_WITH_AS(gr1::compile_spec(gr1::convert_to_gr1(raw), vocab), doctest::Contains("already in use"),
                         InputError);
}

}
