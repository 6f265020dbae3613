// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "hyra/modelio.hpp"
#include "hyra/sat.hpp"

using namespace hyra;

namespace {

struct Fixture {
    ModelDocument doc;
    ClauseDB db;
    TheorySolver theory;
    SatSolver sat;

    explicit Fixture(const std::string& name, int k = 1)
        : doc(parse_model_file(std::string(HYRA_MODELS_DIR) + "/" + name)),
          db(encode(doc.network, doc.goal, k, doc.default_max_delay)),
          theory(db, IcpConfig{.delta = doc.default_delta}),
          sat(db, theory) {}
};

bool trail_well_formed(const std::vector<TrailEntry>& trail) {
    std::set<int> seen;
    for (const auto& e : trail)
        if (!seen.insert(lit_var(e.lit)).second) return false;
    return true;
}

// A starts in a0 or a1 (a real choice, so the initial mode variables stay
// unassigned at level 0), both reaching a2 on the shared label.
struct Choice {
    ModelDocument doc;
    ClauseDB db;
    TheorySolver theory;
    SatSolver sat;

    Choice()
        : doc(parse_model(
              "(network (defaults (k 1) (M 1) (delta 0.1))"
              " (automaton A (alphabet s) (mode a0) (mode a1) (mode a2)"
              "  (jump a0 a2 (labels s)) (jump a1 a2 (labels s))"
              "  (init a0) (init a1))"
              " (automaton B (alphabet s) (mode b0) (mode b1)"
              "  (jump b0 b1 (labels s)) (init b0)))"
              "(goal (modes (A a2) (B b1)))")),
          db(encode(doc.network, doc.goal, 1, 1.0)),
          theory(db, IcpConfig{.delta = 0.1}),
          sat(db, theory) {}
};

}  // namespace

TEST_CASE("fresh solver trail holds only premises from unit clauses") {
    Fixture f("toy.hna");
    const auto& trail = f.sat.get_trail();
    CHECK(f.sat.decision_level() == 0);
    CHECK_FALSE(trail.empty());  // goal units pin the final modes
    for (const auto& e : trail) CHECK_FALSE(e.is_decision);
    CHECK(trail_well_formed(trail));
    // The goal units propagate: a1 and b1 are true at step 1, so their
    // exactly-one siblings are already false.
    CHECK(f.sat.value(make_lit(f.db.mode_var(1, 0, 1), true)) == LitValue::True);
    CHECK(f.sat.value(make_lit(f.db.mode_var(1, 0, 0), true)) == LitValue::False);
    // The single init entry is itself a premise chain.
    CHECK(f.sat.value(make_lit(f.db.mode_var(0, 0, 0), true)) == LitValue::True);
}

TEST_CASE("assert_lit pushes a decision; implications carry antecedents") {
    Choice f;
    int a0 = f.db.mode_var(0, 0, 0);
    REQUIRE(f.sat.value(make_lit(a0, true)) == LitValue::Unassigned);
    REQUIRE(f.sat.assert_lit(make_lit(a0, true)) == AssertResult::Consistent);
    CHECK(f.sat.decision_level() == 1);
    const auto& trail = f.sat.get_trail();
    bool found_decision = false, found_implied = false;
    for (const auto& e : trail) {
        if (e.lit == make_lit(a0, true) && e.is_decision) found_decision = true;
        if (!e.is_decision && e.level > 0) {
            CHECK(e.reason >= 0);  // propagations carry their antecedent
            found_implied = true;
        }
    }
    CHECK(found_decision);
    CHECK(found_implied);  // exactly-one makes the sibling mode false
    CHECK(f.sat.value(make_lit(f.db.mode_var(0, 0, 1), true)) == LitValue::False);
    CHECK(trail_well_formed(trail));
}

TEST_CASE("asserting against a premise backtracks or refutes, never consistent") {
    Fixture f("toy.hna");
    int a1_final = f.db.mode_var(1, 0, 1);  // pinned true by the goal unit
    AssertResult r = f.sat.assert_lit(make_lit(a1_final, false));
    CHECK(r != AssertResult::Consistent);
}

TEST_CASE("internal completion solves the toy and refutes the broken toy") {
    Fixture sat_case("toy.hna");
    CHECK(sat_case.sat.assert_lit(std::nullopt) == AssertResult::DeltaSat);
    const auto& model = sat_case.sat.model();
    CHECK(model[static_cast<size_t>(sat_case.db.mode_var(1, 0, 1))]);
    CHECK(model[static_cast<size_t>(sat_case.db.mode_var(1, 1, 1))]);
    CHECK_FALSE(sat_case.sat.model_incomplete());

    Fixture unsat_case("toy_unsat.hna");
    CHECK(unsat_case.sat.assert_lit(std::nullopt) == AssertResult::Unsat);
}

TEST_CASE("assert_clause: tautologies are free, units force backjumps") {
    Choice f;
    int a0 = f.db.mode_var(0, 0, 0);
    REQUIRE(f.sat.value(make_lit(a0, true)) == LitValue::Unassigned);
    // Tautology: no state change.
    REQUIRE(f.sat.assert_clause({make_lit(a0, true), make_lit(a0, false)}) ==
            AssertResult::Consistent);
    CHECK(f.sat.value(make_lit(a0, true)) == LitValue::Unassigned);

    // Unit clause negating the only decision: backtrack to level 0 and imply.
    REQUIRE(f.sat.assert_lit(make_lit(a0, true)) == AssertResult::Consistent);
    REQUIRE(f.sat.decision_level() == 1);
    AssertResult r = f.sat.assert_clause({make_lit(a0, false)});
    CHECK(r == AssertResult::Backtrack);
    CHECK(f.sat.decision_level() == 0);
    CHECK(f.sat.value(make_lit(a0, false)) == LitValue::True);
    for (const auto& e : f.sat.get_trail())
        if (e.lit == make_lit(a0, false)) CHECK_FALSE(e.is_decision);
}

TEST_CASE("assert_clause falsified by premises alone is unsat") {
    Fixture f("toy.hna");
    int a1_final = f.db.mode_var(1, 0, 1);  // goal premise: true
    CHECK(f.sat.assert_clause({make_lit(a1_final, false)}) == AssertResult::Unsat);
}

TEST_CASE("theory conflicts are learned: contradictory continuous goal") {
    // xa is frozen at 0 by A's modes (no flow), but the goal demands xa >= 0.5.
    std::string text =
        "(network (defaults (k 1) (M 1) (delta 0.01))"
        " (automaton A (vars (xa 0 1)) (alphabet s) (mode a0) (mode a1)"
        "  (jump a0 a1 (labels s)) (init a0 (= xa 0)))"
        " (automaton B (alphabet s) (mode b0) (mode b1)"
        "  (jump b0 b1 (labels s)) (init b0)))"
        "(goal (modes (A a1) (B b1)) (pred (>= xa 0.5)))";
    ModelDocument doc = parse_model(text);
    ClauseDB db = encode(doc.network, doc.goal, 1, 1.0);
    TheorySolver theory(db, IcpConfig{.delta = 0.01});
    SatSolver sat(db, theory);
    CHECK(sat.assert_lit(std::nullopt) == AssertResult::Unsat);
    CHECK(sat.learned_clauses() > 0);
    CHECK_FALSE(sat.model_incomplete());
}
