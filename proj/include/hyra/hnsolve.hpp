// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyra/sat.hpp"

namespace hyra {

enum class SolveMode { Plain, Heuristic, HeuristicLearn };
enum class Verdict { DeltaSat, Unsat, Unknown };

struct SolverConfig {
    SolveMode mode = SolveMode::HeuristicLearn;
    double delta = 0.1;
    int n_flow_steps = 50;
    size_t max_boxes = 100000;
    double timeout_seconds = 0.0;  // 0 = unlimited
    size_t var_cap = 1000000;
    std::function<void(const std::string&)> trace;
};

struct SolveStats {
    uint64_t runs_generated = 0;
    uint64_t run_conflicts = 0;   // clauses learned from dead-end runs
    size_t learned_clauses = 0;   // total, including theory conflicts
    IcpStats icp;
};

struct SolveResult {
    Verdict verdict = Verdict::Unknown;
    CompositeRun witness;  // meaningful when verdict == DeltaSat
    SolveStats stats;
    // Clauses asserted by the dead-end learning branch, for audit.
    std::vector<std::vector<Lit>> run_conflicts;
};

SolveResult hnsolve(const Network& network, const Goal& goal, int k,
                    double max_delay, const SolverConfig& config = {});

// --- Discrete run generation layer -------------------------------------

/// One search-stack entry: an initial-mode choice (depth < |N|) or a
/// jump/noop taken by one automaton at one step.
struct Move {
    int autom = 0;
    int jump_index = -1;  // -1 for init choices and noops
    int from_mode = -1;   // -1 for init choices
    int to_mode = 0;
    std::set<std::string> labels;  // fired labels (jump labels ∩ alphabet)
    bool is_init = false;
    bool is_noop = false;
};

using SearchStack = std::vector<Move>;
using TrailView = std::function<LitValue(Lit)>;

/// Minimum jumps from an initial mode, per automaton and mode index;
/// unreachable modes carry kInfiniteCost (sorted last, never pruned).
std::vector<std::vector<uint32_t>> network_costs(const Network& network);

struct GenRunOptions {
    TrailView trail;  // null = everything unassigned
    // Test hook: veto a complete stack, forcing the search to continue.
    std::function<bool(const SearchStack&)> accept;
    std::function<bool()> should_stop;
};

/// Candidate moves for the automaton at `depth`, before filtering: init
/// choices at step 0, otherwise the jumps out of the mode reached one step
/// earlier plus the self-noop.
std::vector<Move> successor_moves(const Network& network, const SearchStack& stack,
                                  int depth);

/// Drop moves inconsistent with the trail or with the sibling moves
/// already chosen for this step (label synchronization cases).
std::vector<Move> filter_moves(const ClauseDB& db, std::vector<Move> succ,
                               const SearchStack& stack, int step,
                               const TrailView& trail);

/// Depth-first completion of `stack`; true iff a full stack of
/// |N|*(k+1) entries was found.
bool dfs(const ClauseDB& db, const std::vector<std::vector<uint32_t>>& cost,
         const GenRunOptions& opts, SearchStack& stack, bool* aborted);

enum class GenRunStatus { Run, Nil, Aborted };

/// Generate a run consistent with the trail as a literal sequence: mode
/// literals per (step, automaton) and positive sync literals per
/// transition (deduplicated).
GenRunStatus gen_run(const ClauseDB& db,
                     const std::vector<std::vector<uint32_t>>& cost,
                     const GenRunOptions& opts, std::vector<Lit>* out,
                     SearchStack* out_stack = nullptr);

/// Disjunction of the negated decision literals; empty when the trail has
/// no decisions (the caller then reports unsat directly).
std::vector<Lit> conflict_from_trail(const std::vector<TrailEntry>& trail);

/// Rebuild the composite run from a total Boolean model and the theory
/// witness box.
CompositeRun extract_run(const ClauseDB& db, const std::vector<bool>& model,
                         const Box& box);

}  // namespace hyra
