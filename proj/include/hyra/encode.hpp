// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyra/model.hpp"

namespace hyra {

struct UnknownKeyError : std::runtime_error {
    explicit UnknownKeyError(const std::string& what) : std::runtime_error(what) {}
};

struct EncodingOverflowError : std::runtime_error {
    explicit EncodingOverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Literal over Boolean variables: +(v+1) asserts variable v, -(v+1) its
/// negation.
using Lit = int;

inline Lit make_lit(int var, bool positive) { return positive ? var + 1 : -(var + 1); }
inline int lit_var(Lit l) { return (l > 0 ? l : -l) - 1; }
inline bool lit_positive(Lit l) { return l > 0; }
inline Lit lit_negate(Lit l) { return -l; }

enum class BoolKind { Mode, Sync, Aux };

struct BoolVarInfo {
    BoolKind kind;
    int step = -1;    // Mode: state step; Sync/Aux: transition index
    int autom = -1;   // Mode/Aux
    int mode = -1;    // Mode: mode index
    std::string label;  // Sync
    std::string tag;    // Aux: human-readable role
};

enum class NumRole { Start, End, Delay };

struct NumVarInfo {
    NumRole role;
    int step;
    std::string base;  // continuous variable name; empty for Delay
    std::string name;  // canonical unrolled name used inside formulas
    Interval bounds;
};

inline std::string start_var_name(const std::string& base, int step) {
    return base + "@0@" + std::to_string(step);
}
inline std::string end_var_name(const std::string& base, int step) {
    return base + "@t@" + std::to_string(step);
}
inline std::string delay_var_name(int step) { return "t@" + std::to_string(step); }

/// Flow + invariant obligation for an ODE mode occupied at a step; the ICP
/// module discharges it with a validated enclosure.
struct OdeObligation {
    int autom;
    int mode;
    int step;
};

/// One disjunct of an init / transition alternative group.  Asserting the
/// aux variable implies each literal in `implied` and activates
/// `constraint` (a formula over unrolled numeric variable names).
struct Alternative {
    int aux_var;
    std::vector<Lit> implied;
    FormulaPtr constraint;
    bool is_noop = false;
    int jump_index = -1;  // index into the automaton's jump list; -1 otherwise
    int from_mode = -1;
    int to_mode = -1;
};

struct AltGroup {
    enum class Kind { Init, Transition };
    Kind kind;
    int autom;
    int trans = -1;  // Transition groups only
    std::vector<Alternative> alts;
};

/// The unrolled hybrid clause database: Boolean skeleton plus numeric
/// constraints and ODE obligations attached to literals.  Immutable after
/// encode(); shareable across solver instances.
struct ClauseDB {
    const Network* network = nullptr;
    const Goal* goal = nullptr;
    int steps = 0;  // k
    double max_delay = 0.0;

    std::vector<BoolVarInfo> bvars;
    std::vector<NumVarInfo> nvars;
    std::vector<std::vector<Lit>> clauses;
    // Per Boolean variable, activated when it is assigned true.
    std::vector<std::vector<FormulaPtr>> attached;
    std::vector<std::vector<OdeObligation>> ode_attached;
    std::vector<AltGroup> groups;
    std::vector<std::string> sync_labels;  // union alphabet, stable order
    int goal_aux = -1;

    int mode_var(int step, int autom, int mode) const;  // throws UnknownKeyError
    int sync_var(int trans, const std::string& label) const;
    int num_var(const std::string& name) const;
    int start_id(int step, const std::string& base) const;
    int end_id(int step, const std::string& base) const;
    int delay_id(int step) const;

    size_t num_bool_vars() const { return bvars.size(); }
    size_t num_num_vars() const { return nvars.size(); }

    std::string describe_bool_var(int var) const;

  private:
    friend ClauseDB encode(const Network&, const Goal&, int, double, size_t);
    std::map<std::tuple<int, int, int>, int> mode_index_;
    std::map<std::pair<int, std::string>, int> sync_index_;
    std::map<std::string, int> num_index_;
};

ClauseDB encode(const Network& network, const Goal& goal, int k, double max_delay,
                size_t var_cap = 1000000);

/// SMT-LIB-flavored debug dump (not round-tripped).
std::string dump_encoding(const ClauseDB& db);

}  // namespace hyra
