// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>

#include "hyra/modelio.hpp"

using namespace hyra;

namespace {
std::string model_path(const std::string& name) {
    return std::string(HYRA_MODELS_DIR) + "/" + name;
}
}  // namespace

TEST_CASE("s-expression parser basics") {
    auto nodes = sexpr::parse("(a (b 1.5) c) ; trailing comment\n(d)");
    REQUIRE(nodes.size() == 2);
    CHECK(nodes[0].head() == "a");
    REQUIRE(nodes[0].children.size() == 3);
    CHECK(nodes[0].children[1].head() == "b");
    CHECK(nodes[0].children[2].atom == "c");
    CHECK(nodes[1].head() == "d");
    CHECK_THROWS_AS(sexpr::parse("(unbalanced"), SyntaxError);
    CHECK_THROWS_AS(sexpr::parse("(a))"), SyntaxError);
}

TEST_CASE("toy model parses with its defaults") {
    ModelDocument doc = parse_model_file(model_path("toy.hna"));
    CHECK(doc.default_k == 1);
    CHECK(doc.default_max_delay == doctest::Approx(1.0));
    CHECK(doc.default_delta == doctest::Approx(0.1));
    REQUIRE(doc.network.automata.size() == 2);
    CHECK(doc.network.automata[0].name == "A");
    CHECK(doc.network.automata[1].name == "B");
    REQUIRE(doc.network.automata[0].jumps.size() == 1);
    CHECK(doc.network.automata[0].jumps[0].labels == std::set<std::string>{"s"});
    CHECK(doc.goal.target_modes.at("A") == "a1");
    CHECK(doc.goal.target_modes.at("B") == "b1");
    CHECK(validate(doc.network, doc.goal).empty());
}

TEST_CASE("generator instance 1 parses to lock + generator + one tank") {
    ModelDocument doc = parse_model_file(model_path("generator_linear_1.hna"));
    CHECK(doc.default_k == 7);
    REQUIRE(doc.network.automata.size() == 3);
    CHECK(doc.network.automata[0].name == "lock");
    int gi = doc.network.automaton_index("gen");
    int ti = doc.network.automaton_index("tank1");
    REQUIRE(gi >= 0);
    REQUIRE(ti >= 0);
    const Automaton& tank = doc.network.automata[static_cast<size_t>(ti)];
    int pouring = tank.mode_index("pouring");
    REQUIRE(pouring >= 0);
    // Refuel rate 2: pouring uses a closed-form relation r1@t = r1@0 + 2 t.
    REQUIRE(tank.modes[static_cast<size_t>(pouring)].closed_form.has_value());
    auto rel = tank.modes[static_cast<size_t>(pouring)].closed_form->relation;
    CHECK(to_sexpr(rel).find("(* 2 t)") != std::string::npos);
    CHECK(doc.network.automata[static_cast<size_t>(gi)].reads ==
          std::vector<std::string>{"r1"});
}

TEST_CASE("dribble model carries the frozen initial state and goal") {
    ModelDocument doc = parse_model_file(model_path("dribble.hna"));
    CHECK(doc.default_k == 8);
    CHECK(doc.default_max_delay == doctest::Approx(10.0));
    int bi = doc.network.automaton_index("ball");
    REQUIRE(bi >= 0);
    const Automaton& ball = doc.network.automata[static_cast<size_t>(bi)];
    REQUIRE(ball.init.size() == 1);
    CHECK(ball.init[0].mode == "fly");
    std::string init = to_sexpr(ball.init[0].condition);
    CHECK(init.find("(= x 1)") != std::string::npos);
    CHECK(init.find("(= v 0)") != std::string::npos);
    // Bounce reflects the velocity at factor -0.9.
    bool bounce_found = false;
    for (const auto& j : ball.jumps)
        if (j.labels.count("bounce"))
            bounce_found = bounce_found ||
                           to_sexpr(j.update).find("-0.9") != std::string::npos;
    CHECK(bounce_found);
    std::string goal = to_sexpr(doc.goal.predicate);
    CHECK(goal.find("1.5") != std::string::npos);
    CHECK(goal.find("3") != std::string::npos);
}

TEST_CASE("every bundled model parses and validates cleanly") {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(HYRA_MODELS_DIR)) {
        if (entry.path().extension() != ".hna") continue;
        ++seen;
        ModelDocument doc = parse_model_file(entry.path().string());
        CHECK(validate(doc.network, doc.goal).empty());
        CHECK(doc.default_k >= 0);
        CHECK(doc.default_max_delay > 0.0);
        CHECK(doc.default_delta > 0.0);
    }
    CHECK(seen >= 11);
}

TEST_CASE("syntax and semantic errors are reported") {
    CHECK_THROWS_AS(parse_model("(network (automaton a (frobnicate)))"), SyntaxError);
    CHECK_THROWS_AS(parse_model("(nonsense)"), SyntaxError);
    // Structurally fine but semantically broken: jump into an unknown mode.
    CHECK_THROWS_AS(
        parse_model("(network (automaton a (alphabet s) (mode m0)"
                    " (jump m0 nowhere (labels s)) (init m0)))"
                    "(goal (modes (a m0)))"),
        SemanticError);
    CHECK_THROWS_AS(parse_model_file("/nonexistent/missing.hna"), std::runtime_error);
}

TEST_CASE("witness round-trip") {
    CompositeRun run;
    CompositeState s0;
    s0.duration = Interval(0.0, 0.125);
    s0.modes = {"a0", "b0"};
    s0.start_values["xa"] = Interval(0.0, 0.0);
    s0.end_values["xa"] = Interval(0.1, 0.30000000000000004);
    run.states.push_back(s0);
    CompositeState s1 = s0;
    s1.modes = {"a1", "b1"};
    run.states.push_back(s1);
    run.labels.push_back({"s"});

    std::string text = serialize_witness(run);
    CompositeRun back = parse_witness(text);
    CHECK(back == run);
    // parse of serialize of parse is parse (serialization is stable).
    CHECK(serialize_witness(parse_witness(text)) == text);
}

TEST_CASE("zero-step witness") {
    CompositeRun run;
    CompositeState s0;
    s0.duration = Interval(0.0, 1.0);
    s0.modes = {"only"};
    run.states.push_back(s0);
    CompositeRun back = parse_witness(serialize_witness(run));
    CHECK(back == run);
    CHECK(back.labels.empty());
    CHECK_THROWS_AS(parse_witness("(walk)"), SyntaxError);
}
