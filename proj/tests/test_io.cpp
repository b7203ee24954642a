#include <filesystem>

#include "doctest.h"
#include "errors.hpp"
#include "exports.hpp"
#include "json.hpp"
#include "problem_io.hpp"
#include "support.hpp"

using namespace dualsynth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kSmall = R"({
  "dynamics": {"A": [[1, 0], [0, 1]], "B": [[1, 0], [0, 1]]},
  "input_set": [[-1, 1], [-1, 1]],
  "domain": [[0, 2], [0, 2]],
  "initial_set": [[0, 2], [0, 2]],
  "propositions": [{"name": "goal", "box": [[0, 1], [0, 1]]}],
  "environment": [],
  "spec": {"guarantees": ["goal"]},
  "options": {"m": 4, "max_iters": 5}
})";

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dualsynth_io_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("problem files parse with options") {
    const auto p = io::parse_problem(kSmall);
    CHECK(p.sys.state_dim() == 2);
    CHECK(p.sys.propositions.size() == 1);
    CHECK(p.options.m == 4);
    CHECK(p.options.max_iters == 5);
    CHECK(p.env.size() == 1);
}

TEST_CASE("syntax errors give line and column") {
    CHECK_THROWS_WITH_AS(io::parse_problem("{\n  \"domain\": [1, 2,\n}", "x.json"), doctest::Contains("x.json:3:"),
                         InputError);
}

TEST_CASE("schema errors give line and pointer") {
    std::string text = kSmall;
    text.replace(text.find("[[0, 2], [0, 2]]"), 16, "[[0, 2], [0]]");
    CHECK_THROWS_WITH_AS(io::parse_problem(text, "y.json"), doctest::Contains("y.json:4: /domain/1"), InputError);

    std::string extra = kSmall;
    extra.replace(extra.find("\"environment\""), 13, "\"environmnet\"");
    CHECK_THROWS_WITH_AS(io::parse_problem(extra, "z.json"), doctest::Contains("environmnet"), InputError);
}

TEST_CASE("semantic errors are input errors") {
    std::string text = kSmall;
    text.replace(text.find("[[0, 1], [0, 1]]}"), 16, "[[0, 3], [0, 1]]");
    CHECK_THROWS_WITH_AS(io::parse_problem(text), doctest::Contains("inside domain"), InputError);
    CHECK_THROWS_AS(io::load_problem_file("/nonexistent/problem.json"), InputError);
}

TEST_CASE("canonical form and hash are stable under formatting") {
    const auto a = io::parse_problem(kSmall);
    json doc = json::parse(kSmall);
    const auto b = io::parse_problem(doc.dump());
    CHECK(io::canonical_json(a) == io::canonical_json(b));
    CHECK(io::problem_hash(a) == io::problem_hash(b));
    CHECK(io::problem_hash(a).size() == 64);
    // the canonical form parses back to the same problem
    CHECK(io::canonical_json(io::parse_problem(io::canonical_json(a))) == io::canonical_json(a));
    doc["input_set"][0][0] = -0.5;
    CHECK(io::problem_hash(io::parse_problem(doc.dump())) != io::problem_hash(a));
}

TEST_CASE("controllers round-trip through json") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/park.json");
    const auto v = engine::run(p, p.options);
    REQUIRE(v.controller);
    const auto text = io::controller_json(*v.controller);
    const auto back = io::parse_controller(text);
    CHECK(back.region_ids == v.controller->region_ids);
    CHECK(back.boxes == v.controller->boxes);
    CHECK(back.automaton.states == v.controller->automaton.states);
    CHECK(back.automaton.next == v.controller->automaton.next);
    CHECK(back.automaton.initial == v.controller->automaton.initial);
    CHECK(back.problem_hash == v.controller->problem_hash);
    CHECK(io::controller_json(back) == text);
    CHECK_THROWS_AS(io::parse_controller("{}"), InputError);
}

TEST_CASE("artifacts and reports") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/invariant.json");
    const auto v = engine::run(p, p.options);
    const auto dir = scratch("artifacts");
    const auto files = io::write_artifacts(dir.string(), v, p, {true});
    CHECK(fs::exists(dir / "verdict.json"));
    CHECK(fs::exists(dir / "controller.json"));
    CHECK(fs::exists(dir / "partition_0.svg"));
    CHECK(fs::exists(dir / "fts.dot"));
    CHECK(files.size() >= 6);

    const auto verdict = json::parse(io::read_file((dir / "verdict.json").string()));
    CHECK(verdict["outcome"] == "realizable");
    CHECK(verdict["problem_hash"] == io::problem_hash(p));
    CHECK(verdict["stats"].size() == static_cast<std::size_t>(v.iterations));

    const auto svg = io::read_file((dir / "partition_0.svg").string());
    CHECK(svg.find("data-region") != std::string::npos);

    auto r = io::make_report(dir.string());
    CHECK_FALSE(r.partial);
    CHECK(r.text.find("outcome: realizable") != std::string::npos);

    fs::remove(dir / "verdict.json");
    r = io::make_report(dir.string());
    CHECK(r.partial);
    CHECK_FALSE(r.warnings.empty());

    const auto empty = scratch("empty");
    fs::create_directories(empty);
    CHECK_THROWS_AS(io::make_report(empty.string()), InputError);
}

TEST_CASE("trace csv has one row per step") {
    const auto p = io::load_problem_file(testing::problems_dir() + "/park.json");
    const auto v = engine::run(p, p.options);
    REQUIRE(v.controller);
    const auto ex = engine::simulate(*v.controller, p.sys, {0, 1}, std::vector<double>{0.5, 0.5}, 10);
    const auto csv = io::trace_csv(ex, v.controller->env_names, 2);
    CHECK(csv.rfind("t,s_0,s_1,e,u_0,u_1,region,memory\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}

}
