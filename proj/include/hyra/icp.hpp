// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hyra/encode.hpp"

namespace hyra {

enum class DeltaResult { Sat, Unsat, Unknown };

struct IcpConfig {
    double delta = 0.1;
    int n_flow_steps = 50;
    size_t max_boxes = 100000;
    // Width below which a variable is no longer split.
    double min_split_width_factor = 0.25;  // times delta
    std::function<bool()> should_stop;     // deadline hook; may be empty
};

struct IcpStats {
    uint64_t prune_passes = 0;
    uint64_t checks = 0;
    uint64_t boxes_explored = 0;
    uint64_t flow_integrations = 0;
};

/// Box over the encoder's numeric variables (indexed by NumVar id).
struct Box {
    std::vector<Interval> v;

    bool any_empty() const {
        for (const auto& iv : v)
            if (iv.is_empty()) return true;
        return false;
    }
};

namespace detail {

/// Flattened term over numeric variable ids with per-node value slots for
/// the forward/backward (HC4) passes.
struct CNode {
    enum Kind { Const, Var, App } kind = Const;
    double c = 0.0;
    int var = -1;
    Fn fn = Fn::Add;
    int a = -1, b = -1;  // child slots; b unused for unary
    int exponent = 0;
    bool square = false;  // Mul with structurally equal children
    mutable Interval val;  // forward/backward scratch (single-threaded use)
};

struct CompiledConstraint {
    std::vector<CNode> nodes;
    int root = -1;
    bool strict = false;
    std::vector<int> vars;  // sorted unique ids

    Interval eval(const Box& box) const;
    // One forward-backward pass against the delta-relaxed requirement
    // term >= -delta; returns false when the box is emptied.
    bool revise(Box& box, double delta) const;
    // Whole box satisfies the relaxed constraint.
    bool certified(const Box& box, double delta) const;
};

/// Attached formula compiled to a conjunction whose elements are either a
/// single constraint or a disjunction of constraint conjunctions.
struct CompiledFormula {
    std::vector<CompiledConstraint> leaves;
    std::vector<std::vector<std::vector<CompiledConstraint>>> ors;
    std::vector<int> vars;
};

CompiledConstraint compile_constraint(const NormConstraint& nc,
                                      const std::function<int(const std::string&)>& id_of);
CompiledFormula compile_formula(const FormulaPtr& f,
                                const std::function<int(const std::string&)>& id_of);

}  // namespace detail

/// Validated enclosure of an ODE system by interval Euler steps with
/// a-priori slab enclosures.  `bounds` clamps the state; an empty clamp
/// means the flow provably leaves the admissible region within that slab.
struct FlowTube {
    int n_slabs = 0;
    double h = 0.0;
    // grid[m] encloses the state at time m*h; slab[m] encloses the state
    // over [m*h, (m+1)*h].  Both have one entry per flowing variable.
    std::vector<std::vector<Interval>> grid;
    std::vector<std::vector<Interval>> slab;
    // Slabs beyond this index are unreachable (state forced out of bounds).
    int reachable_slabs = 0;
};

FlowTube integrate_flow(
    const std::vector<std::pair<std::string, TermPtr>>& derivatives,
    const std::vector<Interval>& init, double horizon, int n_steps,
    const std::vector<Interval>& bounds,
    const std::function<Interval(const std::string&)>& extra_lookup = nullptr);

/// Name-addressed constraint problem for direct use (tests, witness
/// re-checking).  Wraps the same prune / branch-and-prune machinery the
/// solver runs on the unrolled encoding.
class NamedProblem {
  public:
    void declare(const std::string& name, Interval bounds);
    void constrain(const FormulaPtr& f);

    BoxValuation initial_box() const;
    // Contract `box` to fixpoint (1% improvement threshold); returns false
    // when some domain empties.
    bool prune(BoxValuation& box, double delta) const;
    bool certified(const BoxValuation& box, double delta) const;
    DeltaResult solve(const IcpConfig& cfg, BoxValuation* witness = nullptr,
                      IcpStats* stats = nullptr) const;

  private:
    std::vector<std::string> names_;
    std::vector<Interval> bounds_;
    std::map<std::string, int> ids_;
    std::vector<detail::CompiledFormula> formulas_;
};

/// Theory backend for the unrolled encoding: given the set of true Boolean
/// variables, checks the conjunction of their attached numeric constraints
/// and flow obligations over the global bounds box.
class TheorySolver {
  public:
    TheorySolver(const ClauseDB& db, IcpConfig cfg);

    void set_config(const IcpConfig& cfg) { cfg_ = cfg; }
    const IcpConfig& config() const { return cfg_; }

    // Propagation-only consistency check; Unsat is definitive, Sat means
    // the pruned box already certifies, Unknown otherwise.
    DeltaResult quick_check(const std::vector<int>& active_vars);
    // Full branch-and-prune decision.
    DeltaResult full_check(const std::vector<int>& active_vars);

    // After an Unsat check: subset of `active_vars` whose attachments are
    // jointly inconsistent (greedy minimization).
    std::vector<int> explain(const std::vector<int>& active_vars);

    const Box& witness() const { return witness_; }
    const ClauseDB& db() const { return *db_; }

    IcpStats stats;

  private:
    struct FlowTask {
        const Mode* mode;
        const Automaton* autom;
        int step = 0;
        std::vector<std::string> flowing;     // derivative order
        std::vector<int> start_ids, end_ids;  // flowing vars
        std::vector<Interval> clamp;
        int delay_id = -1;
    };

    Box global_box() const;
    void gather(const std::vector<int>& active_vars,
                std::vector<const detail::CompiledFormula*>& formulas,
                std::vector<const FlowTask*>& flows) const;
    bool prune(Box& box, const std::vector<const detail::CompiledFormula*>& formulas,
               const std::vector<const FlowTask*>& flows, double delta);
    bool contract_flow(Box& box, const FlowTask& task, double delta);
    bool certify(const Box& box,
                 const std::vector<const detail::CompiledFormula*>& formulas,
                 const std::vector<const FlowTask*>& flows, double delta);
    bool flow_certified(const Box& box, const FlowTask& task, double delta);
    DeltaResult branch_and_prune(Box box,
                                 const std::vector<const detail::CompiledFormula*>& formulas,
                                 const std::vector<const FlowTask*>& flows);
    DeltaResult check_vars(const std::vector<int>& active_vars, bool full);

    const ClauseDB* db_;
    IcpConfig cfg_;
    std::vector<std::vector<detail::CompiledFormula>> compiled_;  // per bool var
    std::vector<std::vector<FlowTask>> flow_tasks_;               // per bool var
    Box witness_;
};

}  // namespace hyra
