// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: nine independent criteria, one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hyra/hnsolve.hpp"
#include "hyra/modelio.hpp"
#include "oracle.hpp"

using namespace hyra;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail) {
    if (!ok) ++failures;
    std::printf("criterion %d: %s — %s%s%s\n", criterion, ok ? "PASS" : "FAIL",
                what.c_str(), detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
}

ModelDocument load(const std::string& name) {
    return parse_model_file(std::string(HYRA_MODELS_DIR) + "/" + name);
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

struct TimedSolve {
    SolveResult res;
    double seconds = 0.0;
};

TimedSolve solve(const ModelDocument& doc, int k, SolveMode mode, double delta,
                 double budget_seconds) {
    SolverConfig cfg;
    cfg.mode = mode;
    cfg.delta = delta;
    cfg.timeout_seconds = budget_seconds;
    double start = now_seconds();
    TimedSolve out;
    out.res = hnsolve(doc.network, doc.goal, k, doc.default_max_delay, cfg);
    out.seconds = now_seconds() - start;
    return out;
}

// Witnesses collected by the earlier criteria, re-checked by criterion 9.
struct Wit {
    std::string tag;
    ModelDocument doc;  // owns network + goal for the witness
    double max_delay;
    double delta;
    CompositeRun run;
};
std::vector<Wit> witnesses;

void keep_witness(std::string tag, const ModelDocument& doc, double delta,
                  const SolveResult& res) {
    witnesses.push_back({std::move(tag), doc, doc.default_max_delay, delta,
                         res.witness});
}

// --- Criterion 1: linear generator family, heuristic-learn (+ heuristic) ---

void criterion1() {
    struct Row {
        const char* file;
        int k;
    };
    const Row rows[] = {{"generator_linear_0.hna", 3},
                        {"generator_linear_1.hna", 7},
                        {"generator_linear_2.hna", 11}};
    bool ok = true;
    std::ostringstream detail;
    for (const Row& row : rows) {
        ModelDocument doc = load(row.file);
        ok = ok && doc.default_k == row.k;
        TimedSolve ts = solve(doc, row.k, SolveMode::HeuristicLearn, 0.1, 120.0);
        bool good = ts.res.verdict == Verdict::DeltaSat && ts.seconds <= 120.0;
        ok = ok && good;
        detail << row.file << " k=" << row.k << " "
               << (good ? "delta-sat" : "FAILED") << " " << ts.seconds << "s; ";
        if (good) keep_witness(row.file, doc, 0.1, ts.res);
    }
    // Instance 2 must also finish under the no-learning heuristic mode.
    ModelDocument g2 = load("generator_linear_2.hna");
    TimedSolve th = solve(g2, 11, SolveMode::Heuristic, 0.1, 120.0);
    bool good = th.res.verdict == Verdict::DeltaSat && th.seconds <= 120.0;
    ok = ok && good;
    detail << "instance 2 heuristic " << (good ? "delta-sat" : "FAILED") << " "
           << th.seconds << "s";
    if (good) keep_witness("generator_linear_2.hna (heuristic)", g2, 0.1, th.res);
    report(1, ok, "linear generator instances 0-2 delta-sat at k=3/7/11", detail.str());
}

// --- Criterion 2: linear car, k=6, all three modes ---------------------

void criterion2() {
    ModelDocument doc = load("car_linear_1.hna");
    bool ok = doc.default_k == 6;
    std::ostringstream detail;
    const std::pair<SolveMode, const char*> modes[] = {
        {SolveMode::Plain, "plain"},
        {SolveMode::Heuristic, "heuristic"},
        {SolveMode::HeuristicLearn, "heuristic-learn"}};
    for (const auto& [mode, name] : modes) {
        TimedSolve ts = solve(doc, 6, mode, 0.1, 60.0);
        bool good = ts.res.verdict == Verdict::DeltaSat && ts.seconds <= 60.0;
        ok = ok && good;
        detail << name << " " << (good ? "delta-sat" : "FAILED") << " "
               << ts.seconds << "s; ";
        if (good) keep_witness(std::string("car_linear_1.hna (") + name + ")", doc,
                               0.1, ts.res);
    }
    report(2, ok, "car instance 1 delta-sat at k=6 in all three modes", detail.str());
}

// --- Criterion 3: dribble, k=8 and k=12, exact action counts ------------

void criterion3() {
    ModelDocument doc = load("dribble.hna");
    bool ok = true;
    std::ostringstream detail;
    const std::pair<int, int> cases[] = {{8, 2}, {12, 3}};
    for (const auto& [k, dribbles] : cases) {
        TimedSolve ts = solve(doc, k, SolveMode::HeuristicLearn, 0.1, 120.0);
        int seen = 0;
        if (ts.res.verdict == Verdict::DeltaSat)
            for (const auto& labels : ts.res.witness.labels)
                seen += labels.count("dribble") > 0;
        bool good = ts.res.verdict == Verdict::DeltaSat && seen == dribbles &&
                    ts.seconds <= 120.0;
        ok = ok && good;
        detail << "k=" << k << " "
               << (ts.res.verdict == Verdict::DeltaSat ? "delta-sat" : "FAILED")
               << " with " << seen << " dribbles in " << ts.seconds << "s; ";
        if (good) keep_witness("dribble.hna k=" + std::to_string(k), doc, 0.1, ts.res);
    }
    report(3, ok, "dribble delta-sat at k=8/12 with exactly 2/3 dribble actions",
           detail.str());
}

// --- Criterion 4: run-generation equivalence against brute force --------

oracle::DiscreteRun project(const Network& net, const SearchStack& stack, int k) {
    const size_t n = net.automata.size();
    oracle::DiscreteRun run;
    run.modes.resize(static_cast<size_t>(k) + 1);
    run.labels.resize(static_cast<size_t>(k));
    for (size_t j = 0; j < stack.size(); ++j) {
        const size_t step = j / n;
        run.modes[step].push_back(stack[j].to_mode);
        if (step >= 1)
            run.labels[step - 1].insert(stack[j].labels.begin(), stack[j].labels.end());
    }
    return run;
}

void criterion4() {
    std::mt19937 rng(20260401);
    int compared = 0, mismatches = 0;
    size_t total_runs = 0;
    while (compared < 50) {
        Network net = oracle::random_network(rng);
        int k = 1 + static_cast<int>(rng() % 3);
        auto expected = oracle::enumerate_runs(net, k, 20000);
        if (expected.empty()) continue;  // brute-force budget guard
        Goal goal;
        goal.predicate = Formula::truth();
        ClauseDB db = encode(net, goal, k, 1.0);
        std::set<oracle::DiscreteRun> got;
        GenRunOptions opts;
        opts.accept = [&](const SearchStack& stack) {
            got.insert(project(net, stack, k));
            return false;  // veto, i.e. block this prefix and continue
        };
        std::vector<Lit> lits;
        gen_run(db, network_costs(net), opts, &lits);
        if (got != expected) ++mismatches;
        total_runs += expected.size();
        ++compared;
    }
    report(4, mismatches == 0,
           "generated discrete run sets equal brute-force enumeration",
           std::to_string(compared) + " networks, " + std::to_string(total_runs) +
               " runs, " + std::to_string(mismatches) + " mismatches");
}

// --- Criterion 5: learned clauses hold in every satisfying assignment ---

// Extend a legal run to the full Boolean assignments of the encoding by
// choosing, per alternative group, every alternative consistent with the
// run's modes and fired labels.
bool implied_holds(const ClauseDB& db, Lit l, const oracle::DiscreteRun& run) {
    const BoolVarInfo& info = db.bvars[static_cast<size_t>(lit_var(l))];
    bool truth = false;
    if (info.kind == BoolKind::Mode)
        truth = run.modes[static_cast<size_t>(info.step)][static_cast<size_t>(
                    info.autom)] == info.mode;
    else if (info.kind == BoolKind::Sync)
        truth = run.labels[static_cast<size_t>(info.step)].count(info.label) > 0;
    else
        return true;  // aux literals are never implied by other alternatives
    return truth == lit_positive(l);
}

std::vector<std::vector<bool>> assignments_of_run(const ClauseDB& db,
                                                  const oracle::DiscreteRun& run) {
    std::vector<bool> base(db.num_bool_vars(), false);
    for (size_t v = 0; v < db.bvars.size(); ++v) {
        const BoolVarInfo& info = db.bvars[v];
        if (info.kind == BoolKind::Mode)
            base[v] = run.modes[static_cast<size_t>(info.step)][static_cast<size_t>(
                          info.autom)] == info.mode;
        else if (info.kind == BoolKind::Sync)
            base[v] = run.labels[static_cast<size_t>(info.step)].count(info.label) > 0;
    }
    // Consistent alternatives per group.
    std::vector<std::vector<int>> options;
    for (const auto& g : db.groups) {
        std::vector<int> fits;
        for (const auto& alt : g.alts) {
            bool ok = true;
            for (Lit l : alt.implied) ok = ok && implied_holds(db, l, run);
            if (g.kind == AltGroup::Kind::Transition) {
                int from = run.modes[static_cast<size_t>(g.trans)]
                                    [static_cast<size_t>(g.autom)];
                ok = ok && alt.from_mode == from;
            }
            if (ok) fits.push_back(alt.aux_var);
        }
        if (fits.empty()) return {};  // not extendable: caller flags it
        options.push_back(std::move(fits));
    }
    std::vector<std::vector<bool>> out;
    std::vector<size_t> pick(options.size(), 0);
    for (;;) {
        std::vector<bool> asg = base;
        for (size_t g = 0; g < options.size(); ++g)
            asg[static_cast<size_t>(options[g][pick[g]])] = true;
        out.push_back(std::move(asg));
        if (out.size() > 4096) return out;  // defensive cap, never hit in practice
        size_t g = 0;
        while (g < options.size() && ++pick[g] == options[g].size()) pick[g++] = 0;
        if (g == options.size()) break;
    }
    return out;
}

bool clause_satisfied(const std::vector<Lit>& cl, const std::vector<bool>& asg) {
    for (Lit l : cl)
        if (asg[static_cast<size_t>(lit_var(l))] == lit_positive(l)) return true;
    return false;
}

void criterion5() {
    std::mt19937 rng(20260402);
    int instances = 0, quiet = 0, informative = 0;
    int violations = 0, broken_extensions = 0;
    size_t clauses_checked = 0, assignments_checked = 0;
    while (instances < 50) {
        Network net = oracle::random_network(rng);
        Goal goal = oracle::random_goal(net, rng);
        int k = 1 + static_cast<int>(rng() % 3);
        auto sat_runs = oracle::enumerate_goal_runs(net, goal, k, 20000);
        auto no_pin = oracle::enumerate_runs(net, k, 20000);
        if (no_pin.empty()) continue;  // brute-force budget guard

        SolverConfig cfg;
        cfg.mode = SolveMode::HeuristicLearn;
        SolveResult res = hnsolve(net, goal, k, 1.0, cfg);
        // The learning branch is rare on easy instances; reserve part of
        // the suite for instances that actually learned clauses so the
        // entailment check is exercised, not vacuous.
        bool learned = !res.run_conflicts.empty() && !sat_runs.empty();
        if (!learned && quiet >= 42) continue;
        ++instances;
        (learned ? informative : quiet) += 1;
        // Continuous part is trivial, so verdicts must match the oracle.
        if ((res.verdict == Verdict::DeltaSat) != !sat_runs.empty()) ++violations;
        if (res.run_conflicts.empty()) continue;

        ClauseDB db = encode(net, goal, k, 1.0);
        for (const auto& run : sat_runs) {
            auto assignments = assignments_of_run(db, run);
            if (assignments.empty()) {
                ++broken_extensions;
                continue;
            }
            for (const auto& asg : assignments) {
                ++assignments_checked;
                // Sanity: the extension satisfies the encoding itself.
                for (const auto& cl : db.clauses)
                    if (!clause_satisfied(cl, asg)) ++violations;
                for (const auto& cl : res.run_conflicts) {
                    ++clauses_checked;
                    if (!clause_satisfied(cl, asg)) ++violations;
                }
            }
        }
    }
    report(5, violations == 0 && broken_extensions == 0 && informative > 0,
           "dead-end clauses hold in every satisfying assignment",
           std::to_string(instances) + " instances (" +
               std::to_string(informative) + " with learned clauses), " +
               std::to_string(assignments_checked) + " assignments, " +
               std::to_string(clauses_checked) + " clause checks, " +
               std::to_string(violations) + " violations");
}

// --- Criterion 6: configuration agreement on a fixed 20-instance suite ---

void criterion6() {
    std::mt19937 rng(20260403);
    int sat_kept = 0, unsat_kept = 0, disagreements = 0, wrong = 0;
    while (sat_kept < 10 || unsat_kept < 10) {
        Network net = oracle::random_network(rng);
        Goal goal = oracle::random_goal(net, rng);
        int k = 1 + static_cast<int>(rng() % 3);
        auto no_pin = oracle::enumerate_runs(net, k, 20000);
        if (no_pin.empty()) continue;
        bool oracle_sat = !oracle::enumerate_goal_runs(net, goal, k, 20000).empty();
        if (oracle_sat && sat_kept >= 10) continue;
        if (!oracle_sat && unsat_kept >= 10) continue;
        (oracle_sat ? sat_kept : unsat_kept) += 1;

        Verdict verdicts[3];
        int vi = 0;
        for (SolveMode mode : {SolveMode::Plain, SolveMode::Heuristic,
                               SolveMode::HeuristicLearn}) {
            SolverConfig cfg;
            cfg.mode = mode;
            SolveResult res = hnsolve(net, goal, k, 1.0, cfg);
            verdicts[vi++] = res.verdict;
            if (mode == SolveMode::HeuristicLearn &&
                res.verdict == Verdict::DeltaSat) {
                ModelDocument doc;
                doc.network = net;
                doc.goal = goal;
                doc.default_max_delay = 1.0;
                keep_witness("random instance (criterion 6)", doc, 0.1, res);
            }
        }
        if (verdicts[0] != verdicts[1] || verdicts[1] != verdicts[2])
            ++disagreements;
        Verdict expected = oracle_sat ? Verdict::DeltaSat : Verdict::Unsat;
        for (Verdict v : verdicts) wrong += v != expected;
    }
    report(6, disagreements == 0 && wrong == 0,
           "plain / heuristic / heuristic-learn agree on 10 sat + 10 unsat",
           std::to_string(disagreements) + " disagreements, " +
               std::to_string(wrong) + " wrong verdicts");
}

// --- Criterion 7: interval solver soundness suite ------------------------

void criterion7() {
    std::mt19937 rng(20260404);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int lost = 0, cases = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        NamedProblem p;
        p.declare("x", Interval(-4.0, 4.0));
        p.declare("y", Interval(-4.0, 4.0));
        auto t = add(mul(constant(coef(rng)), var("x")),
                     add(mul(constant(coef(rng)), mul(var("y"), var("y"))),
                         mul(constant(coef(rng)), mul(var("x"), var("y")))));
        double d = coef(rng);
        bool lower = rng() % 2;
        p.constrain(atom({t, Rel::Le, constant(d)}));
        p.constrain(lower ? atom({var("x"), Rel::Ge, constant(-1.0)})
                          : atom({var("y"), Rel::Le, constant(2.0)}));
        std::vector<PointValuation> feasible;
        for (int s = 0; s < 25; ++s) {
            PointValuation pt{{"x", -4.0 + 8.0 * unit(rng)},
                              {"y", -4.0 + 8.0 * unit(rng)}};
            if (eval_point(t, pt) <= d &&
                (lower ? pt.at("x") >= -1.0 : pt.at("y") <= 2.0))
                feasible.push_back(std::move(pt));
        }
        BoxValuation box = p.initial_box();
        bool nonempty = p.prune(box, 0.01);
        ++cases;
        for (const auto& pt : feasible) {
            if (!nonempty || !box["x"].contains(pt.at("x")) ||
                !box["y"].contains(pt.at("y")))
                ++lost;
        }
    }

    NamedProblem sqrt2;
    sqrt2.declare("x", Interval(0.0, 2.0));
    sqrt2.constrain(atom({mul(var("x"), var("x")), Rel::Eq, constant(2.0)}));
    BoxValuation w;
    bool sqrt_ok = sqrt2.solve({.delta = 0.01}, &w) == DeltaResult::Sat &&
                   std::abs(w["x"].mid() - 1.41421356) <= 0.01;

    auto deriv = sub(constant(-9.8), mul(constant(0.1), mul(var("v"), var("v"))));
    FlowTube tube = integrate_flow({{"v", deriv}}, {Interval(0.0, 0.0)}, 0.1, 50,
                                   {Interval(-20.0, 20.0)});
    auto f = [](double, const std::vector<double>& y) {
        return std::vector<double>{-9.8 - 0.1 * y[0] * y[0]};
    };
    double truth = oracle::rk4(f, {0.0}, 0.0, 0.1, 100000)[0];
    bool flow_ok = tube.reachable_slabs == 50 && tube.grid.back()[0].contains(truth) &&
                   tube.grid.back()[0].width() <= 0.05;

    report(7, lost == 0 && sqrt_ok && flow_ok,
           "prune containment x1000, sqrt(2) witness, drag-flow enclosure",
           std::to_string(cases) + " prune cases with " + std::to_string(lost) +
               " lost points; sqrt2 " + (sqrt_ok ? "ok" : "FAILED") + "; flow " +
               (flow_ok ? "ok" : "FAILED") + " (oracle " + std::to_string(truth) +
               ")");
}

// --- Criterion 8: encoding size law on every bundled model ---------------

void criterion8() {
    bool ok = true;
    int models = 0;
    std::ostringstream detail;
    for (const auto& entry : std::filesystem::directory_iterator(HYRA_MODELS_DIR)) {
        if (entry.path().extension() != ".hna") continue;
        ++models;
        ModelDocument doc = parse_model_file(entry.path().string());
        ClauseDB db = encode(doc.network, doc.goal, doc.default_k,
                             doc.default_max_delay);
        size_t expected = oracle::expected_clause_count(doc.network, doc.goal,
                                                        doc.default_k);
        if (db.clauses.size() != expected) {
            ok = false;
            detail << entry.path().filename().string() << " expected " << expected
                   << " got " << db.clauses.size() << "; ";
        }
        // Per step and automaton: one alternative per jump, one noop per mode.
        for (const auto& g : db.groups) {
            const Automaton& a = doc.network.automata[static_cast<size_t>(g.autom)];
            size_t jumps = 0, noops = 0;
            for (const auto& alt : g.alts) (alt.is_noop ? noops : jumps) += 1;
            if (g.kind == AltGroup::Kind::Init) {
                ok = ok && jumps + noops == a.init.size();
            } else if (jumps != a.jumps.size() || noops != a.modes.size()) {
                ok = false;
                detail << entry.path().filename().string() << " group mismatch; ";
            }
        }
    }
    report(8, ok && models >= 11,
           "transition clause counts match the closed form on all bundled models",
           std::to_string(models) + " models" +
               (detail.str().empty() ? "" : "; " + detail.str()));
}

// --- Criterion 9: witness validity ---------------------------------------

// Margin for re-evaluating with the generic interval evaluator, which may
// be structurally looser than the solver's compiled forms by rounding.
constexpr double kEvalSlack = 1e-7;

bool delta_holds(const FormulaPtr& f, const BoxValuation& box, double delta) {
    switch (f->kind()) {
        case Formula::Kind::True:
            return true;
        case Formula::Kind::Leaf: {
            for (const auto& nc : normalize(f->leaf())) {
                Interval v = eval_interval(nc.term, box);
                if (v.is_empty() || v.lo < -delta - kEvalSlack) return false;
            }
            return true;
        }
        case Formula::Kind::And: {
            for (const auto& kid : f->children())
                if (!delta_holds(kid, box, delta)) return false;
            return true;
        }
        case Formula::Kind::Or: {
            for (const auto& kid : f->children())
                if (delta_holds(kid, box, delta)) return true;
            return false;
        }
    }
    return false;
}

bool intervals_delta_equal(const Interval& a, const Interval& b, double delta) {
    BoxValuation box{{"a", a}, {"b", b}};
    return delta_holds(atom({var("a"), Rel::Eq, var("b")}), box, delta);
}

// Full independent re-check of one witness.
bool witness_valid(const Wit& w, std::string* why) {
    const Network& net = w.doc.network;
    const Goal& goal = w.doc.goal;
    const CompositeRun& run = w.run;
    const double delta = w.delta;
    auto fail = [&](const std::string& msg) {
        *why = w.tag + ": " + msg;
        return false;
    };
    if (run.states.empty() || run.labels.size() + 1 != run.states.size())
        return fail("malformed run shape");

    // Discrete projection legality under the label rule.
    std::vector<std::vector<std::string>> modes;
    for (const auto& st : run.states) modes.push_back(st.modes);
    if (!oracle::run_is_legal(net, modes, run.labels))
        return fail("discrete projection violates the label rule");

    // Goal: pinned modes and predicate over the final end valuation.
    for (const auto& [aname, mname] : goal.target_modes) {
        int aj = net.automaton_index(aname);
        if (run.states.back().modes[static_cast<size_t>(aj)] != mname)
            return fail("final mode misses the goal pin for " + aname);
    }
    if (!delta_holds(goal.predicate, run.states.back().end_values, delta))
        return fail("goal predicate violated");

    // Init conditions over the first start valuation.
    for (size_t j = 0; j < net.automata.size(); ++j) {
        const Automaton& a = net.automata[j];
        bool any = false;
        for (const auto& e : a.init)
            if (e.mode == run.states[0].modes[j])
                any = any || delta_holds(e.condition, run.states[0].start_values, delta);
        if (!any) return fail("init condition violated for " + a.name);
    }

    for (size_t i = 0; i < run.states.size(); ++i) {
        const CompositeState& st = run.states[i];
        if (st.duration.lo < -kEvalSlack || st.duration.hi > w.max_delay + kEvalSlack)
            return fail("duration out of bounds at step " + std::to_string(i));
        for (size_t j = 0; j < net.automata.size(); ++j) {
            const Automaton& a = net.automata[j];
            const Mode& m = a.modes[static_cast<size_t>(a.mode_index(st.modes[j]))];
            // Invariant at both endpoints of the step.
            if (!delta_holds(m.invariant, st.start_values, delta) ||
                !delta_holds(m.invariant, st.end_values, delta))
                return fail("invariant violated in " + a.name + "." + m.name +
                            " at step " + std::to_string(i));
            // Flow relation (closed form) or the held-variable frames.
            std::set<std::string> held;
            for (const auto& [v, b] : a.variables) held.insert(v);
            if (m.closed_form) {
                BoxValuation fv;
                fv["t"] = st.duration;
                for (const auto& [v, iv] : st.start_values) fv[v + "@0"] = iv;
                for (const auto& [v, iv] : st.end_values) fv[v + "@t"] = iv;
                if (!delta_holds(m.closed_form->relation, fv, delta))
                    return fail("flow relation violated in " + a.name + "." + m.name +
                                " at step " + std::to_string(i));
                for (const auto& name : free_vars(m.closed_form->relation))
                    if (name.size() > 2 && name.substr(name.size() - 2) == "@t")
                        held.erase(name.substr(0, name.size() - 2));
            } else if (m.ode) {
                for (const auto& [v, d] : m.ode->derivatives) held.erase(v);
            }
            for (const auto& v : held)
                if (!intervals_delta_equal(st.start_values.at(v), st.end_values.at(v),
                                           delta))
                    return fail("variable " + v + " not held by " + a.name + "." +
                                m.name + " at step " + std::to_string(i));
        }
    }

    // Transitions: each automaton either stays (frame) or takes a jump
    // whose fired labels match and whose guard/update/frame all hold.
    for (size_t i = 0; i + 1 < run.states.size(); ++i) {
        const CompositeState& st = run.states[i];
        const CompositeState& nx = run.states[i + 1];
        for (size_t j = 0; j < net.automata.size(); ++j) {
            const Automaton& a = net.automata[j];
            std::set<std::string> slice;
            for (const auto& l : run.labels[i])
                if (a.alphabet.count(l)) slice.insert(l);
            auto frame_ok = [&](const std::set<std::string>& primed) {
                for (const auto& [v, b] : a.variables)
                    if (!primed.count(v) &&
                        !intervals_delta_equal(nx.start_values.at(v),
                                               st.end_values.at(v), delta))
                        return false;
                return true;
            };
            if (st.modes[j] == nx.modes[j] && slice.empty()) {
                if (frame_ok({})) continue;
            }
            bool any = false;
            for (const auto& jp : a.jumps) {
                if (jp.from != st.modes[j] || jp.to != nx.modes[j]) continue;
                std::set<std::string> fired;
                for (const auto& l : jp.labels)
                    if (a.alphabet.count(l)) fired.insert(l);
                if (fired != slice) continue;
                if (!delta_holds(jp.guard, st.end_values, delta)) continue;
                BoxValuation uv = st.end_values;
                std::set<std::string> primed;
                for (const auto& name : free_vars(jp.update))
                    if (!name.empty() && name.back() == '\'') {
                        std::string base = name.substr(0, name.size() - 1);
                        primed.insert(base);
                        uv[name] = nx.start_values.at(base);
                    }
                if (!delta_holds(jp.update, uv, delta)) continue;
                if (!frame_ok(primed)) continue;
                any = true;
                break;
            }
            if (!any)
                return fail("no consistent move for " + a.name + " at transition " +
                            std::to_string(i));
        }
    }
    return true;
}

void criterion9() {
    int checked = 0, bad = 0;
    std::string first_why;
    for (const Wit& w : witnesses) {
        ++checked;
        std::string why;
        if (!witness_valid(w, &why)) {
            ++bad;
            if (first_why.empty()) first_why = why;
        }
    }
    report(9, bad == 0 && checked > 0,
           "every delta-sat witness re-checks to >= -delta and is a legal run",
           std::to_string(checked) + " witnesses, " + std::to_string(bad) +
               " failures" + (first_why.empty() ? "" : " (" + first_why + ")"));
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
