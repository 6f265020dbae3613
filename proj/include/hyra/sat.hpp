// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hyra/icp.hpp"

namespace hyra {

enum class LitValue { True, False, Unassigned };

struct TrailEntry {
    Lit lit;
    int level;
    bool is_decision;
    int reason = -1;  // clause index for propagations, -1 otherwise
};

enum class AssertResult {
    Consistent,  // literal holds on the current trail
    Backtrack,   // earlier assertions were undone; caller must resync
    DeltaSat,    // a total assignment passed the full theory check
    Unknown,     // theory could not decide within its resource budget
    Unsat,       // top-level conflict
};

/// CDCL core over the encoded Boolean skeleton with the interval solver as
/// theory backend.  Clients drive it through assert_lit / assert_clause and
/// observe the trail; conflict analysis learns first-UIP clauses that
/// persist across backtracking.
class SatSolver {
  public:
    SatSolver(const ClauseDB& db, TheorySolver& theory);

    /// With a literal: push it as a decision and propagate.  Without one:
    /// repeatedly take fixed-order internal decisions until the assignment
    /// is total and theory-checked, or a conflict undoes an external
    /// assertion (Backtrack), or the instance is decided.
    AssertResult assert_lit(std::optional<Lit> lit);

    /// Add a clause (learned outside the core).  May backjump to make the
    /// clause propagate; Unsat when it is falsified at level zero.
    AssertResult assert_clause(std::vector<Lit> clause);

    const std::vector<TrailEntry>& get_trail() const { return trail_; }
    LitValue value(Lit l) const;
    int decision_level() const { return static_cast<int>(level_starts_.size()); }
    bool model_incomplete() const { return incomplete_; }
    size_t learned_clauses() const { return learned_count_; }

    // True Boolean vars of the last DeltaSat assignment.
    const std::vector<bool>& model() const { return model_; }

    std::function<void(const std::string&)> trace;
    // Deadline hook: internal completion returns Unknown once this fires.
    std::function<bool()> should_stop;

  private:
    struct Clause {
        std::vector<Lit> lits;
    };

    int enqueue(Lit l, int reason);  // -1 ok, else conflicting clause index
    int propagate();                 // -1 ok, else conflicting clause index
    void unassign_to(size_t trail_size);
    void backjump(int level);
    // Returns the backjump level, filling `learned`; -1 signals level-zero
    // conflict (unsat).
    int analyze(int conflict_clause, std::vector<Lit>& learned);
    int add_clause_internal(std::vector<Lit> lits, bool learned);
    std::vector<int> active_theory_vars() const;
    // Theory propagation hook; returns conflict clause index or -1.
    int theory_check();
    AssertResult handle_conflict(int conflict_clause, int boundary_level,
                                 bool* hit_boundary);

    const ClauseDB* db_;
    TheorySolver* theory_;
    std::vector<Clause> clauses_;
    std::vector<std::vector<int>> watches_;  // per literal index
    std::vector<LitValue> assign_;
    std::vector<int> var_level_;
    std::vector<int> var_reason_;
    std::vector<TrailEntry> trail_;
    std::vector<size_t> level_starts_;
    size_t propagated_ = 0;
    size_t learned_count_ = 0;
    bool incomplete_ = false;
    bool root_unsat_ = false;
    bool theory_dirty_ = false;
    std::vector<bool> model_;
    std::vector<bool> has_attachments_;
};

}  // namespace hyra
