// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyra/expr.hpp"

namespace hyra {

/// Per-variable derivative terms; variables not listed are constant in the
/// mode.  Derivatives may only mention variables owned by the same
/// automaton (validated).
struct OdeFlow {
    std::vector<std::pair<std::string, TermPtr>> derivatives;
};

/// Relation between start values, end values, and the step duration.
/// Variables are addressed with the conventions of modelio: `name@0`
/// (start), `name@t` (end), and `t` (duration).  Owned variables not
/// mentioned as `name@t` get an implicit end = start frame.
struct ClosedFormFlow {
    FormulaPtr relation;
};

struct Mode {
    std::string name;
    std::optional<OdeFlow> ode;
    std::optional<ClosedFormFlow> closed_form;
    FormulaPtr invariant;  // over instantaneous variables; truth() if none
};

struct Jump {
    std::string from;
    std::string to;
    std::set<std::string> labels;
    FormulaPtr guard;   // over end-of-step variables (plain names)
    FormulaPtr update;  // over plain names (end values) and `name'` (next start)
};

struct InitEntry {
    std::string mode;
    FormulaPtr condition;  // over start variables (plain names)
};

struct Automaton {
    std::string name;
    // Owned continuous variables with their global bounds.
    std::vector<std::pair<std::string, Interval>> variables;
    // Variables owned elsewhere that this automaton may read.
    std::vector<std::string> reads;
    std::vector<Mode> modes;
    std::vector<Jump> jumps;
    std::vector<InitEntry> init;
    std::set<std::string> alphabet;

    int mode_index(const std::string& mode_name) const;  // -1 when unknown
    bool owns(const std::string& variable) const;
};

struct Network {
    std::vector<Automaton> automata;

    int automaton_index(const std::string& name) const;  // -1 when unknown
    // Union of all owned variables, with bounds; owner conflicts are caught
    // by validate.
    std::map<std::string, Interval> all_variables() const;
    std::set<std::string> union_alphabet() const;
};

struct Goal {
    // automaton name -> required final mode (only goal-relevant automata).
    std::map<std::string, std::string> target_modes;
    FormulaPtr predicate;  // over final end-of-step variables (plain names)
};

/// One timed network state of a run; valuations are interval-valued since
/// witnesses come out of the ICP solver as boxes.
struct CompositeState {
    Interval duration;
    std::vector<std::string> modes;  // one per automaton, network order
    std::map<std::string, Interval> start_values;
    std::map<std::string, Interval> end_values;
};

struct CompositeRun {
    std::vector<CompositeState> states;          // k+1 entries
    std::vector<std::set<std::string>> labels;   // k entries

    bool operator==(const CompositeRun& other) const;
};

struct Diagnostic {
    std::string automaton;  // empty for network-level findings
    std::string locus;      // mode/jump description
    std::string message;

    std::string str() const;
};

std::vector<Diagnostic> validate(const Network& network, const Goal& goal);

inline constexpr uint32_t kInfiniteCost = UINT32_MAX;

/// Minimum number of jumps from an initial mode, by breadth-first
/// relaxation over the jump graph; unreachable modes get kInfiniteCost.
std::map<std::string, uint32_t> run_costs(const Automaton& automaton);

/// Jumps leaving `mode`, in declaration order.
std::vector<const Jump*> enabled_jumps(const Automaton& automaton,
                                       const std::string& mode);

}  // namespace hyra
