// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/sat.hpp"

#include <algorithm>
#include <limits>

namespace hyra {

namespace {
size_t lit_index(Lit l) {
    return static_cast<size_t>(lit_var(l)) * 2 + (lit_positive(l) ? 0 : 1);
}
}  // namespace

SatSolver::SatSolver(const ClauseDB& db, TheorySolver& theory)
    : db_(&db), theory_(&theory) {
    size_t n = db.num_bool_vars();
    watches_.resize(n * 2);
    assign_.assign(n, LitValue::Unassigned);
    var_level_.assign(n, 0);
    var_reason_.assign(n, -1);
    has_attachments_.resize(n);
    for (size_t v = 0; v < n; ++v)
        has_attachments_[v] = !db.attached[v].empty() || !db.ode_attached[v].empty();
    bool root_conflict = false;
    for (const auto& cl : db.clauses) {
        if (add_clause_internal(cl, false) == -2) root_conflict = true;
    }
    if (root_conflict) root_unsat_ = true;
}

LitValue SatSolver::value(Lit l) const {
    LitValue v = assign_[static_cast<size_t>(lit_var(l))];
    if (v == LitValue::Unassigned) return v;
    bool t = (v == LitValue::True) == lit_positive(l);
    return t ? LitValue::True : LitValue::False;
}

int SatSolver::enqueue(Lit l, int reason) {
    LitValue v = value(l);
    if (v == LitValue::True) return -1;
    if (v == LitValue::False) return reason;
    size_t var = static_cast<size_t>(lit_var(l));
    assign_[var] = lit_positive(l) ? LitValue::True : LitValue::False;
    var_level_[var] = decision_level();
    var_reason_[var] = reason;
    trail_.push_back({l, decision_level(), false, reason});
    if (lit_positive(l) && has_attachments_[var]) theory_dirty_ = true;
    return -1;
}

int SatSolver::propagate() {
    while (propagated_ < trail_.size()) {
        Lit p = trail_[propagated_++].lit;
        Lit false_lit = lit_negate(p);
        std::vector<int>& ws = watches_[lit_index(false_lit)];
        size_t keep = 0;
        for (size_t i = 0; i < ws.size(); ++i) {
            int ci = ws[i];
            Clause& c = clauses_[static_cast<size_t>(ci)];
            if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
            if (value(c.lits[0]) == LitValue::True) {
                ws[keep++] = ci;
                continue;
            }
            bool moved = false;
            for (size_t j = 2; j < c.lits.size(); ++j) {
                if (value(c.lits[j]) != LitValue::False) {
                    std::swap(c.lits[1], c.lits[j]);
                    watches_[lit_index(c.lits[1])].push_back(ci);
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            ws[keep++] = ci;
            if (value(c.lits[0]) == LitValue::False) {
                // Conflict: restore remaining watches and report.
                for (size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
                ws.resize(keep);
                return ci;
            }
            enqueue(c.lits[0], ci);
        }
        ws.resize(keep);
    }
    return -1;
}

void SatSolver::unassign_to(size_t trail_size) {
    while (trail_.size() > trail_size) {
        size_t var = static_cast<size_t>(lit_var(trail_.back().lit));
        assign_[var] = LitValue::Unassigned;
        var_reason_[var] = -1;
        trail_.pop_back();
    }
    propagated_ = std::min(propagated_, trail_.size());
}

void SatSolver::backjump(int level) {
    if (level >= decision_level()) return;
    size_t target = level_starts_[static_cast<size_t>(level)];
    level_starts_.resize(static_cast<size_t>(level));
    unassign_to(target);
    propagated_ = trail_.size();
}

int SatSolver::add_clause_internal(std::vector<Lit> lits, bool learned) {
    // Returns the clause index, -1 when the clause was absorbed (empty
    // no-op, tautology, level-zero unit), or -2 on immediate conflict.
    std::sort(lits.begin(), lits.end(),
              [](Lit a, Lit b) { return lit_var(a) != lit_var(b)
                                            ? lit_var(a) < lit_var(b)
                                            : a < b; });
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (size_t i = 0; i + 1 < lits.size(); ++i)
        if (lit_var(lits[i]) == lit_var(lits[i + 1])) return -1;  // tautology
    if (lits.empty()) return -2;
    if (lits.size() == 1) {
        if (decision_level() != 0) backjump(0);
        if (value(lits[0]) == LitValue::False) return -2;  // falsified premise
        return enqueue(lits[0], -1) >= 0 || propagate() >= 0 ? -2 : -1;
    }
    // Watch two literals that are non-false, or failing that the latest
    // assigned ones, so the watch invariant holds under the current trail.
    auto rank = [this](Lit l) {
        if (value(l) != LitValue::False) return std::numeric_limits<int>::max();
        return var_level_[static_cast<size_t>(lit_var(l))];
    };
    std::stable_sort(lits.begin(), lits.end(),
                     [&](Lit a, Lit b) { return rank(a) > rank(b); });
    clauses_.push_back({lits});
    int ci = static_cast<int>(clauses_.size()) - 1;
    watches_[lit_index(lits[0])].push_back(ci);
    watches_[lit_index(lits[1])].push_back(ci);
    if (learned) ++learned_count_;
    return ci;
}

std::vector<int> SatSolver::active_theory_vars() const {
    std::vector<int> out;
    for (size_t v = 0; v < assign_.size(); ++v)
        if (assign_[v] == LitValue::True && has_attachments_[v])
            out.push_back(static_cast<int>(v));
    return out;
}

int SatSolver::theory_check() {
    if (!theory_dirty_) return -1;
    theory_dirty_ = false;
    std::vector<int> active = active_theory_vars();
    if (theory_->quick_check(active) != DeltaResult::Unsat) return -1;
    std::vector<int> core = theory_->explain(active);
    std::vector<Lit> clause;
    clause.reserve(core.size());
    for (int v : core) clause.push_back(make_lit(v, false));
    if (trace) {
        std::string msg = "theory conflict, core size " + std::to_string(core.size());
        trace(msg);
    }
    // -1: absorbed, propagation will surface the effect; -2: level-zero
    // conflict (caller must report unsat); >= 0: proper conflict clause.
    return add_clause_internal(std::move(clause), true);
}

int SatSolver::analyze(int conflict_clause, std::vector<Lit>& learned) {
    // Level-zero or below-current conflicts: land on the highest level
    // actually involved before running first-UIP resolution there.
    int max_level = 0;
    for (Lit l : clauses_[static_cast<size_t>(conflict_clause)].lits)
        max_level = std::max(max_level, var_level_[static_cast<size_t>(lit_var(l))]);
    if (max_level == 0) return -1;
    if (max_level < decision_level()) backjump(max_level);

    learned.clear();
    learned.push_back(0);  // slot for the asserting literal
    std::vector<char> seen(assign_.size(), 0);
    int counter = 0;
    Lit p = 0;
    int index = static_cast<int>(trail_.size()) - 1;
    int reason = conflict_clause;
    do {
        for (Lit q : clauses_[static_cast<size_t>(reason)].lits) {
            size_t v = static_cast<size_t>(lit_var(q));
            if (p != 0 && lit_var(q) == lit_var(p)) continue;
            if (seen[v] || var_level_[v] == 0) continue;
            seen[v] = 1;
            if (var_level_[v] == decision_level())
                ++counter;
            else
                learned.push_back(q);
        }
        while (!seen[static_cast<size_t>(lit_var(trail_[static_cast<size_t>(index)].lit))])
            --index;
        p = trail_[static_cast<size_t>(index)].lit;
        --index;
        seen[static_cast<size_t>(lit_var(p))] = 0;
        --counter;
        reason = var_reason_[static_cast<size_t>(lit_var(p))];
    } while (counter > 0);
    learned[0] = lit_negate(p);

    if (learned.size() == 1) return 0;
    size_t best = 1;
    for (size_t i = 2; i < learned.size(); ++i)
        if (var_level_[static_cast<size_t>(lit_var(learned[i]))] >
            var_level_[static_cast<size_t>(lit_var(learned[best]))])
            best = i;
    std::swap(learned[1], learned[best]);
    return var_level_[static_cast<size_t>(lit_var(learned[1]))];
}

AssertResult SatSolver::handle_conflict(int conflict_clause, int boundary_level,
                                        bool* hit_boundary) {
    std::vector<Lit> learned;
    int level = analyze(conflict_clause, learned);
    if (level < 0) {
        root_unsat_ = true;
        return AssertResult::Unsat;
    }
    backjump(level);
    if (decision_level() < boundary_level) *hit_boundary = true;
    if (learned.size() == 1) {
        ++learned_count_;
        if (enqueue(learned[0], -1) >= 0) {
            root_unsat_ = true;
            return AssertResult::Unsat;
        }
    } else {
        int ci = add_clause_internal(learned, true);
        if (ci == -2) {
            root_unsat_ = true;
            return AssertResult::Unsat;
        }
        if (ci >= 0 && enqueue(clauses_[static_cast<size_t>(ci)].lits[0], ci) >= 0) {
            root_unsat_ = true;
            return AssertResult::Unsat;
        }
    }
    return AssertResult::Consistent;
}

AssertResult SatSolver::assert_lit(std::optional<Lit> lit) {
    if (root_unsat_) return AssertResult::Unsat;
    int entry_level = decision_level();
    bool hit_boundary = false;

    auto stabilize = [&]() -> AssertResult {
        for (;;) {
            int confl = propagate();
            if (confl < 0) confl = theory_check();
            if (confl == -2) {
                root_unsat_ = true;
                return AssertResult::Unsat;
            }
            if (confl < 0) return AssertResult::Consistent;
            AssertResult r = handle_conflict(confl, entry_level, &hit_boundary);
            if (r == AssertResult::Unsat) return r;
        }
    };

    if (lit) {
        if (value(*lit) == LitValue::True) return AssertResult::Consistent;
        if (value(*lit) == LitValue::False) return AssertResult::Backtrack;
        if (trace) trace("decide " + db_->describe_bool_var(lit_var(*lit)) +
                         (lit_positive(*lit) ? "" : " = false"));
        level_starts_.push_back(trail_.size());
        trail_.push_back({*lit, decision_level(), true, -1});
        size_t var = static_cast<size_t>(lit_var(*lit));
        assign_[var] = lit_positive(*lit) ? LitValue::True : LitValue::False;
        var_level_[var] = decision_level();
        var_reason_[var] = -1;
        if (lit_positive(*lit) && has_attachments_[var]) theory_dirty_ = true;
        AssertResult r = stabilize();
        if (r == AssertResult::Unsat) return r;
        if (hit_boundary || value(*lit) != LitValue::True)
            return AssertResult::Backtrack;
        return AssertResult::Consistent;
    }

    // Internal completion: fixed-order decisions (lowest variable id first,
    // positive phase), full theory check once the assignment is total.
    for (;;) {
        if (should_stop && should_stop()) return AssertResult::Unknown;
        AssertResult r = stabilize();
        if (r == AssertResult::Unsat) return r;
        if (hit_boundary) return AssertResult::Backtrack;
        int next = -1;
        for (size_t v = 0; v < assign_.size(); ++v)
            if (assign_[v] == LitValue::Unassigned) {
                next = static_cast<int>(v);
                break;
            }
        if (next < 0) {
            std::vector<int> active = active_theory_vars();
            DeltaResult dr = theory_->full_check(active);
            if (dr == DeltaResult::Sat) {
                model_.resize(assign_.size());
                for (size_t v = 0; v < assign_.size(); ++v)
                    model_[v] = assign_[v] == LitValue::True;
                return AssertResult::DeltaSat;
            }
            if (dr == DeltaResult::Unsat) {
                std::vector<int> core = theory_->explain(active);
                std::vector<Lit> clause;
                for (int v : core) clause.push_back(make_lit(v, false));
                if (trace)
                    trace("full theory conflict, core size " +
                          std::to_string(core.size()));
                int ci = add_clause_internal(std::move(clause), true);
                if (ci == -2) {
                    root_unsat_ = true;
                    return AssertResult::Unsat;
                }
                if (ci >= 0) {
                    AssertResult hr = handle_conflict(ci, entry_level, &hit_boundary);
                    if (hr == AssertResult::Unsat) return hr;
                }
                continue;
            }
            // Theory undecided within budget: block this total assignment
            // and remember that any final unsat verdict is not trustworthy.
            incomplete_ = true;
            std::vector<Lit> block;
            for (const auto& e : trail_)
                if (e.is_decision) block.push_back(lit_negate(e.lit));
            if (block.empty()) return AssertResult::Unknown;
            if (trace) trace("theory undecided; blocking assignment");
            int ci = add_clause_internal(std::move(block), true);
            if (ci == -2) {
                root_unsat_ = true;
                return AssertResult::Unsat;
            }
            if (ci >= 0) {
                AssertResult hr = handle_conflict(ci, entry_level, &hit_boundary);
                if (hr == AssertResult::Unsat) return hr;
            }
            continue;
        }
        Lit l = make_lit(next, true);
        if (trace) trace("auto-decide " + db_->describe_bool_var(next));
        level_starts_.push_back(trail_.size());
        trail_.push_back({l, decision_level(), true, -1});
        assign_[static_cast<size_t>(next)] = LitValue::True;
        var_level_[static_cast<size_t>(next)] = decision_level();
        var_reason_[static_cast<size_t>(next)] = -1;
        if (has_attachments_[static_cast<size_t>(next)]) theory_dirty_ = true;
    }
}

AssertResult SatSolver::assert_clause(std::vector<Lit> clause) {
    if (root_unsat_) return AssertResult::Unsat;
    int entry_level = decision_level();
    bool hit_boundary = false;

    // Tautologies are dropped inside add_clause_internal.  If the clause is
    // currently falsified, jump back far enough for it to propagate.
    std::vector<Lit> lits = clause;
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    bool satisfied = false, falsified = true;
    int max_level = 0, second_level = 0;
    for (Lit l : lits) {
        LitValue v = value(l);
        if (v == LitValue::True) satisfied = true;
        if (v != LitValue::False) {
            falsified = false;
        } else {
            int lvl = var_level_[static_cast<size_t>(lit_var(l))];
            if (lvl >= max_level) {
                second_level = max_level;
                max_level = lvl;
            } else if (lvl > second_level) {
                second_level = lvl;
            }
        }
    }
    if (falsified && !lits.empty()) {
        if (max_level == 0) {
            root_unsat_ = true;
            return AssertResult::Unsat;
        }
        backjump(second_level);
        if (decision_level() < entry_level) hit_boundary = true;
    }
    int ci = add_clause_internal(clause, true);
    if (ci == -2) {
        root_unsat_ = true;
        return AssertResult::Unsat;
    }
    if (ci >= 0 && !satisfied) {
        const Clause& c = clauses_[static_cast<size_t>(ci)];
        if (value(c.lits[0]) == LitValue::Unassigned &&
            value(c.lits[1]) == LitValue::False)
            enqueue(c.lits[0], ci);
    }
    for (;;) {
        int confl = propagate();
        if (confl < 0) confl = theory_check();
        if (confl == -2) {
            root_unsat_ = true;
            return AssertResult::Unsat;
        }
        if (confl < 0) break;
        AssertResult r = handle_conflict(confl, entry_level, &hit_boundary);
        if (r == AssertResult::Unsat) return r;
    }
    return hit_boundary || decision_level() < entry_level ? AssertResult::Backtrack
                                                          : AssertResult::Consistent;
}

}  // namespace hyra
