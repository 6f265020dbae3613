// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/hnsolve.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace hyra {

std::vector<std::vector<uint32_t>> network_costs(const Network& network) {
    std::vector<std::vector<uint32_t>> out;
    for (const auto& a : network.automata) {
        auto by_name = run_costs(a);
        std::vector<uint32_t> row;
        row.reserve(a.modes.size());
        for (const auto& m : a.modes) row.push_back(by_name.at(m.name));
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<Move> successor_moves(const Network& network, const SearchStack& stack,
                                  int depth) {
    const int n = static_cast<int>(network.automata.size());
    const int step = depth / n;
    const int i = depth % n;
    const Automaton& a = network.automata[static_cast<size_t>(i)];
    std::vector<Move> succ;
    if (step == 0) {
        std::set<int> seen;
        for (const auto& e : a.init) {
            int q = a.mode_index(e.mode);
            if (!seen.insert(q).second) continue;
            Move m;
            m.autom = i;
            m.to_mode = q;
            m.is_init = true;
            succ.push_back(std::move(m));
        }
    } else {
        int q = stack[static_cast<size_t>(depth - n)].to_mode;
        const std::string& qname = a.modes[static_cast<size_t>(q)].name;
        for (size_t ji = 0; ji < a.jumps.size(); ++ji) {
            const Jump& j = a.jumps[ji];
            if (j.from != qname) continue;
            Move m;
            m.autom = i;
            m.jump_index = static_cast<int>(ji);
            m.from_mode = q;
            m.to_mode = a.mode_index(j.to);
            for (const auto& l : j.labels)
                if (a.alphabet.count(l)) m.labels.insert(l);
            succ.push_back(std::move(m));
        }
        Move noop;
        noop.autom = i;
        noop.from_mode = q;
        noop.to_mode = q;
        noop.is_noop = true;
        succ.push_back(std::move(noop));
    }
    return succ;
}

namespace {

std::set<std::string> shared_fired(const std::set<std::string>& li,
                                   const std::set<std::string>& lj,
                                   const std::set<std::string>& fired) {
    std::set<std::string> out;
    for (const auto& l : fired)
        if (li.count(l) && lj.count(l)) out.insert(l);
    return out;
}

bool persists(const Move& m) { return m.labels.empty() && m.from_mode == m.to_mode; }

}  // namespace

std::vector<Move> filter_moves(const ClauseDB& db, std::vector<Move> succ,
                               const SearchStack& stack, int step,
                               const TrailView& trail) {
    const Network& net = *db.network;
    const int n = static_cast<int>(net.automata.size());
    const int i = static_cast<int>(stack.size()) % n;
    std::vector<Move> out;
    for (auto& m : succ) {
        if (trail) {
            if (trail(make_lit(db.mode_var(step, m.autom, m.to_mode), true)) ==
                LitValue::False)
                continue;
            bool bad = false;
            if (step >= 1)
                for (const auto& l : m.labels)
                    if (trail(make_lit(db.sync_var(step - 1, l), true)) ==
                        LitValue::False) {
                        bad = true;
                        break;
                    }
            if (bad) continue;
        }
        const auto& li = net.automata[static_cast<size_t>(m.autom)].alphabet;
        bool ok = true;
        for (int j = 0; j < i; ++j) {
            const Move& sib = stack[stack.size() - static_cast<size_t>(i - j)];
            const auto& lj = net.automata[static_cast<size_t>(sib.autom)].alphabet;
            auto mine = shared_fired(li, lj, m.labels);
            auto theirs = shared_fired(li, lj, sib.labels);
            if ((persists(sib) && !mine.empty()) || (persists(m) && !theirs.empty()) ||
                mine != theirs) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(std::move(m));
    }
    return out;
}

bool dfs(const ClauseDB& db, const std::vector<std::vector<uint32_t>>& cost,
         const GenRunOptions& opts, SearchStack& stack, bool* aborted) {
    const Network& net = *db.network;
    const size_t n = net.automata.size();
    const size_t full = n * static_cast<size_t>(db.steps + 1);
    if (opts.should_stop && opts.should_stop()) {
        if (aborted) *aborted = true;
        return false;
    }
    if (stack.size() == full) return !opts.accept || opts.accept(stack);
    const int depth = static_cast<int>(stack.size());
    const int step = depth / static_cast<int>(n);
    std::vector<Move> succ =
        filter_moves(db, successor_moves(net, stack, depth), stack, step, opts.trail);
    std::stable_sort(succ.begin(), succ.end(), [&](const Move& a, const Move& b) {
        return cost[static_cast<size_t>(a.autom)][static_cast<size_t>(a.to_mode)] <
               cost[static_cast<size_t>(b.autom)][static_cast<size_t>(b.to_mode)];
    });
    for (auto& m : succ) {
        stack.push_back(std::move(m));
        if (dfs(db, cost, opts, stack, aborted)) return true;
        stack.pop_back();
        if (aborted && *aborted) return false;
    }
    return false;
}

GenRunStatus gen_run(const ClauseDB& db,
                     const std::vector<std::vector<uint32_t>>& cost,
                     const GenRunOptions& opts, std::vector<Lit>* out,
                     SearchStack* out_stack) {
    SearchStack stack;
    bool aborted = false;
    if (!dfs(db, cost, opts, stack, &aborted))
        return aborted ? GenRunStatus::Aborted : GenRunStatus::Nil;
    const size_t n = db.network->automata.size();
    out->clear();
    std::set<std::pair<int, std::string>> emitted;
    for (size_t j = 0; j < stack.size(); ++j) {
        const int step = static_cast<int>(j / n);
        const Move& m = stack[j];
        out->push_back(make_lit(db.mode_var(step, m.autom, m.to_mode), true));
        if (step >= 1)
            for (const auto& l : m.labels)
                if (emitted.insert({step - 1, l}).second)
                    out->push_back(make_lit(db.sync_var(step - 1, l), true));
    }
    if (out_stack) *out_stack = std::move(stack);
    return GenRunStatus::Run;
}

std::vector<Lit> conflict_from_trail(const std::vector<TrailEntry>& trail) {
    std::vector<Lit> clause;
    for (const auto& e : trail)
        if (e.is_decision) clause.push_back(lit_negate(e.lit));
    return clause;
}

CompositeRun extract_run(const ClauseDB& db, const std::vector<bool>& model,
                         const Box& box) {
    const Network& net = *db.network;
    const auto all_vars = net.all_variables();
    CompositeRun run;
    for (int i = 0; i <= db.steps; ++i) {
        CompositeState st;
        st.duration = box.v[static_cast<size_t>(db.delay_id(i))];
        for (size_t j = 0; j < net.automata.size(); ++j) {
            const Automaton& a = net.automata[j];
            for (size_t q = 0; q < a.modes.size(); ++q)
                if (model[static_cast<size_t>(
                        db.mode_var(i, static_cast<int>(j), static_cast<int>(q)))]) {
                    st.modes.push_back(a.modes[q].name);
                    break;
                }
        }
        for (const auto& [v, bounds] : all_vars) {
            st.start_values[v] = box.v[static_cast<size_t>(db.start_id(i, v))];
            st.end_values[v] = box.v[static_cast<size_t>(db.end_id(i, v))];
        }
        run.states.push_back(std::move(st));
    }
    for (int i = 0; i < db.steps; ++i) {
        std::set<std::string> labels;
        for (const auto& l : db.sync_labels)
            if (model[static_cast<size_t>(db.sync_var(i, l))]) labels.insert(l);
        run.labels.push_back(std::move(labels));
    }
    return run;
}

SolveResult hnsolve(const Network& network, const Goal& goal, int k,
                    double max_delay, const SolverConfig& config) {
    SolveResult res;
    ClauseDB db = encode(network, goal, k, max_delay, config.var_cap);

    std::function<bool()> stop;
    if (config.timeout_seconds > 0.0) {
        auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(config.timeout_seconds));
        stop = [deadline] { return std::chrono::steady_clock::now() >= deadline; };
    }

    IcpConfig icfg;
    icfg.delta = config.delta;
    icfg.n_flow_steps = config.n_flow_steps;
    icfg.max_boxes = config.max_boxes;
    icfg.should_stop = stop;
    TheorySolver theory(db, icfg);
    SatSolver sat(db, theory);
    sat.trace = config.trace;
    sat.should_stop = stop;

    auto finish = [&](Verdict v) {
        res.verdict = v;
        res.stats.learned_clauses = sat.learned_clauses();
        res.stats.icp = theory.stats;
        return res;
    };
    auto finish_sat = [&]() {
        res.witness = extract_run(db, sat.model(), theory.witness());
        return finish(Verdict::DeltaSat);
    };
    // An unsat conclusion only stands if no assignment was abandoned on a
    // theory resource limit along the way.
    auto unsat_verdict = [&]() {
        return sat.model_incomplete() ? Verdict::Unknown : Verdict::Unsat;
    };

    if (config.mode == SolveMode::Plain) {
        switch (sat.assert_lit(std::nullopt)) {
            case AssertResult::DeltaSat: return finish_sat();
            case AssertResult::Unsat: return finish(unsat_verdict());
            default: return finish(Verdict::Unknown);
        }
    }

    const auto costs = network_costs(network);
    GenRunOptions opts;
    opts.trail = [&sat](Lit l) { return sat.value(l); };
    opts.should_stop = stop;

    for (;;) {
        if (stop && stop()) return finish(Verdict::Unknown);
        std::vector<Lit> run_lits;
        for (;;) {  // regenerate until a run extends the trail
            GenRunStatus st = gen_run(db, costs, opts, &run_lits);
            if (st == GenRunStatus::Aborted) return finish(Verdict::Unknown);
            if (st == GenRunStatus::Run) {
                ++res.stats.runs_generated;
                if (config.trace)
                    config.trace("run generated, " +
                                 std::to_string(run_lits.size()) + " literals");
                break;
            }
            // Dead end: no discrete run extends the current decisions.
            if (config.mode == SolveMode::HeuristicLearn) {
                std::vector<Lit> clause = conflict_from_trail(sat.get_trail());
                if (clause.empty()) return finish(unsat_verdict());
                res.run_conflicts.push_back(clause);
                ++res.stats.run_conflicts;
                if (config.trace)
                    config.trace("dead end, learning clause of size " +
                                 std::to_string(clause.size()));
                if (sat.assert_clause(std::move(clause)) == AssertResult::Unsat)
                    return finish(unsat_verdict());
            } else {
                // No learning: hand control to the SAT core to move past
                // the dead end.
                switch (sat.assert_lit(std::nullopt)) {
                    case AssertResult::DeltaSat: return finish_sat();
                    case AssertResult::Unsat: return finish(unsat_verdict());
                    case AssertResult::Unknown: return finish(Verdict::Unknown);
                    default: break;  // Backtrack: trail changed, retry
                }
            }
            if (stop && stop()) return finish(Verdict::Unknown);
        }

        for (size_t l = 0; l <= run_lits.size(); ++l) {
            AssertResult r = l < run_lits.size() ? sat.assert_lit(run_lits[l])
                                                 : sat.assert_lit(std::nullopt);
            if (r == AssertResult::DeltaSat) return finish_sat();
            if (r == AssertResult::Unsat) return finish(unsat_verdict());
            if (r == AssertResult::Unknown) return finish(Verdict::Unknown);
            if (r != AssertResult::Consistent) break;  // resync with the trail
        }
    }
}

}  // namespace hyra
