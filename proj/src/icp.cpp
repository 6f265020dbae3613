// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/icp.hpp"

#include <algorithm>
#include <cmath>

namespace hyra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double round_down(double x) {
    return std::isfinite(x) ? std::nextafter(x, -kInf) : x;
}
double round_up(double x) { return std::isfinite(x) ? std::nextafter(x, kInf) : x; }

Interval nonneg(const Interval& a) { return intersect(a, Interval(0.0, kInf)); }

// Natural log of a (restricted to its positive part), outward rounded.
Interval ilog(const Interval& a) {
    if (a.is_empty() || a.hi <= 0.0) return Interval::empty();
    double lo = a.lo <= 0.0 ? -kInf : round_down(std::log(a.lo));
    double hi = round_up(std::log(a.hi));
    return {lo, hi};
}

// Preimage of x^n for n >= 1: even roots give the symmetric interval, odd
// roots the signed one.  Outward rounded.
Interval iroot(const Interval& a, int n) {
    if (a.is_empty()) return Interval::empty();
    if (n == 1) return a;
    auto root = [n](double x) {
        return x < 0.0 ? -std::pow(-x, 1.0 / n) : std::pow(x, 1.0 / n);
    };
    if (n % 2 == 0) {
        Interval p = nonneg(a);
        if (p.is_empty()) return Interval::empty();
        double u = round_up(root(p.hi));
        return {-u, u};
    }
    return {round_down(root(a.lo)), round_up(root(a.hi))};
}

bool shrink(Interval& target, const Interval& by) {
    target = intersect(target, by);
    return !target.is_empty();
}

}  // namespace

namespace detail {

namespace {

int build_nodes(const TermPtr& t, std::vector<CNode>& nodes,
                const std::function<int(const std::string&)>& id_of,
                std::vector<int>& vars) {
    CNode node;
    if (t->is_constant()) {
        node.kind = CNode::Const;
        node.c = t->constant();
    } else if (t->is_variable()) {
        node.kind = CNode::Var;
        node.var = id_of(t->variable());
        vars.push_back(node.var);
    } else {
        const auto& app = t->app();
        node.kind = CNode::App;
        node.fn = app.fn;
        node.exponent = app.exponent;
        if (app.fn == Fn::Mul && structurally_equal(app.args[0], app.args[1])) {
            node.square = true;
            node.a = build_nodes(app.args[0], nodes, id_of, vars);
        } else {
            node.a = build_nodes(app.args[0], nodes, id_of, vars);
            if (app.args.size() > 1) node.b = build_nodes(app.args[1], nodes, id_of, vars);
        }
    }
    nodes.push_back(node);
    return static_cast<int>(nodes.size()) - 1;
}

Interval forward_app(const CNode& n, const Interval& a, const Interval& b) {
    if (a.is_empty() || (n.b >= 0 && b.is_empty())) return Interval::empty();
    if (n.square) return isquare(a);
    switch (n.fn) {
        case Fn::Add: return iadd(a, b);
        case Fn::Sub: return isub(a, b);
        case Fn::Mul: return imul(a, b);
        case Fn::Div: return idiv(a, b);
        case Fn::Neg: return ineg(a);
        case Fn::Pow: return ipow(a, n.exponent);
        case Fn::Sin: return isin(a);
        case Fn::Cos: return icos(a);
        case Fn::Exp: return iexp(a);
        case Fn::Sqrt: return isqrt(a);
        case Fn::Min: return imin(a, b);
        case Fn::Max: return imax(a, b);
    }
    return Interval::whole();
}

// Refine children of an App node from its (already narrowed) value.
// Returns false on an emptied child domain.
bool backward_app(const CNode& n, Interval& a, Interval* b) {
    const Interval& r = n.val;
    if (n.square) {
        Interval s = nonneg(r);
        if (s.is_empty()) return false;
        Interval u = isqrt(s);
        if (!shrink(a, hull(ineg(u), u))) return false;
        if (a.lo >= 0.0) return shrink(a, u);
        if (a.hi <= 0.0) return shrink(a, ineg(u));
        return true;
    }
    switch (n.fn) {
        case Fn::Add:
            return shrink(a, isub(r, *b)) && shrink(*b, isub(r, a));
        case Fn::Sub:
            return shrink(a, iadd(r, *b)) && shrink(*b, isub(a, r));
        case Fn::Mul:
            if (!(b->lo <= 0.0 && 0.0 <= b->hi)) {
                if (!shrink(a, idiv(r, *b))) return false;
            } else if (b->is_point() && !r.contains(0.0)) {
                return false;  // a * 0 cannot avoid zero
            }
            if (!(a.lo <= 0.0 && 0.0 <= a.hi)) {
                if (!shrink(*b, idiv(r, a))) return false;
            } else if (a.is_point() && a.lo == 0.0 && !r.contains(0.0)) {
                return false;
            }
            return true;
        case Fn::Div:
            if (!shrink(a, imul(r, *b))) return false;
            if (!(r.lo <= 0.0 && 0.0 <= r.hi)) {
                if (!shrink(*b, idiv(a, r))) return false;
            }
            return true;
        case Fn::Neg:
            return shrink(a, ineg(r));
        case Fn::Pow:
            if (n.exponent == 0) return true;
            return shrink(a, iroot(r, n.exponent));
        case Fn::Exp:
            return shrink(a, ilog(r));
        case Fn::Sqrt: {
            Interval p = nonneg(r);
            if (p.is_empty()) return false;
            return shrink(a, isquare(p));
        }
        case Fn::Sin:
        case Fn::Cos:
            return r.intersects(Interval(-1.0, 1.0));
        case Fn::Min:
            if (!shrink(a, Interval(r.lo, kInf))) return false;
            if (!shrink(*b, Interval(r.lo, kInf))) return false;
            if (a.lo > r.hi && !shrink(*b, Interval(-kInf, r.hi))) return false;
            if (b->lo > r.hi && !shrink(a, Interval(-kInf, r.hi))) return false;
            return true;
        case Fn::Max:
            if (!shrink(a, Interval(-kInf, r.hi))) return false;
            if (!shrink(*b, Interval(-kInf, r.hi))) return false;
            if (a.hi < r.lo && !shrink(*b, Interval(r.lo, kInf))) return false;
            if (b->hi < r.lo && !shrink(a, Interval(r.lo, kInf))) return false;
            return true;
    }
    return true;
}

}  // namespace

Interval CompiledConstraint::eval(const Box& box) const {
    for (const CNode& n : nodes) {
        switch (n.kind) {
            case CNode::Const: n.val = Interval(n.c); break;
            case CNode::Var: n.val = box.v[static_cast<size_t>(n.var)]; break;
            case CNode::App:
                n.val = forward_app(n, nodes[static_cast<size_t>(n.a)].val,
                                    n.b >= 0 ? nodes[static_cast<size_t>(n.b)].val
                                             : Interval::empty());
                break;
        }
    }
    return nodes[static_cast<size_t>(root)].val;
}

bool CompiledConstraint::revise(Box& box, double) const {
    // Contract with the exact constraint (t >= 0); the delta margin applies
    // only when certifying a witness.  Relaxing here would let each equality
    // leak slop that products then amplify beyond any useful bound.
    Interval r = eval(box);
    if (r.is_empty()) return false;
    nodes[static_cast<size_t>(root)].val = intersect(r, Interval(0.0, kInf));
    if (nodes[static_cast<size_t>(root)].val.is_empty()) return false;
    for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
        const CNode& n = nodes[static_cast<size_t>(i)];
        if (n.val.is_empty()) return false;
        if (n.kind == CNode::App) {
            Interval& a = nodes[static_cast<size_t>(n.a)].val;
            Interval* b = n.b >= 0 ? &nodes[static_cast<size_t>(n.b)].val : nullptr;
            if (!backward_app(n, a, b)) return false;
        } else if (n.kind == CNode::Var) {
            Interval& dom = box.v[static_cast<size_t>(n.var)];
            dom = intersect(dom, n.val);
            if (dom.is_empty()) return false;
        }
    }
    return true;
}

bool CompiledConstraint::certified(const Box& box, double delta) const {
    Interval r = eval(box);
    return !r.is_empty() && r.lo >= -delta;
}

CompiledConstraint compile_constraint(const NormConstraint& nc,
                                      const std::function<int(const std::string&)>& id_of) {
    CompiledConstraint cc;
    cc.strict = nc.strict;
    cc.root = build_nodes(nc.term, cc.nodes, id_of, cc.vars);
    std::sort(cc.vars.begin(), cc.vars.end());
    cc.vars.erase(std::unique(cc.vars.begin(), cc.vars.end()), cc.vars.end());
    return cc;
}

namespace {

using Branch = std::vector<NormConstraint>;

// Disjunctive normal form over constraint leaves; formulas attached by the
// encoder are small, so the blow-up is bounded in practice.
std::vector<Branch> to_dnf(const FormulaPtr& f) {
    switch (f->kind()) {
        case Formula::Kind::True:
            return {Branch{}};
        case Formula::Kind::Leaf:
            return {normalize(f->leaf())};
        case Formula::Kind::And: {
            std::vector<Branch> acc{Branch{}};
            for (const auto& child : f->children()) {
                std::vector<Branch> next;
                for (const auto& lhs : acc)
                    for (const auto& rhs : to_dnf(child)) {
                        Branch merged = lhs;
                        merged.insert(merged.end(), rhs.begin(), rhs.end());
                        next.push_back(std::move(merged));
                    }
                acc = std::move(next);
            }
            return acc;
        }
        case Formula::Kind::Or: {
            std::vector<Branch> acc;
            for (const auto& child : f->children())
                for (auto& br : to_dnf(child)) acc.push_back(std::move(br));
            return acc;
        }
    }
    return {Branch{}};
}

void merge_vars(std::vector<int>& into, const std::vector<int>& from) {
    into.insert(into.end(), from.begin(), from.end());
}

}  // namespace

CompiledFormula compile_formula(const FormulaPtr& f,
                                const std::function<int(const std::string&)>& id_of) {
    CompiledFormula out;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        switch (g->kind()) {
            case Formula::Kind::True:
                break;
            case Formula::Kind::Leaf:
                for (const auto& nc : normalize(g->leaf())) {
                    out.leaves.push_back(compile_constraint(nc, id_of));
                    merge_vars(out.vars, out.leaves.back().vars);
                }
                break;
            case Formula::Kind::And:
                for (const auto& child : g->children()) walk(child);
                break;
            case Formula::Kind::Or: {
                std::vector<std::vector<CompiledConstraint>> branches;
                for (const auto& br : to_dnf(g)) {
                    std::vector<CompiledConstraint> compiled;
                    for (const auto& nc : br) {
                        compiled.push_back(compile_constraint(nc, id_of));
                        merge_vars(out.vars, compiled.back().vars);
                    }
                    branches.push_back(std::move(compiled));
                }
                out.ors.push_back(std::move(branches));
                break;
            }
        }
    };
    walk(f);
    std::sort(out.vars.begin(), out.vars.end());
    out.vars.erase(std::unique(out.vars.begin(), out.vars.end()), out.vars.end());
    return out;
}

}  // namespace detail

namespace {

using detail::CompiledFormula;

Box hull_boxes(const Box& a, const Box& b) {
    Box out = a;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = hull(out.v[i], b.v[i]);
    return out;
}

bool notably_improved(const Box& before, const Box& after) {
    for (size_t i = 0; i < before.v.size(); ++i) {
        double w0 = before.v[i].width();
        double w1 = after.v[i].width();
        if (std::isinf(w0)) {
            if (!std::isinf(w1) || before.v[i] != after.v[i]) return true;
        } else if (w0 - w1 > 0.01 * w0) {
            return true;
        }
    }
    return false;
}

struct PruneCtx {
    std::vector<const CompiledFormula*> formulas;
    std::function<bool(Box&)> flow_contract;            // nullable
    std::function<bool(const Box&)> flow_certify;       // nullable
    double delta = 0.0;
    int max_passes = 12;
    IcpStats* stats = nullptr;
};

bool revise_branch(Box& box, const std::vector<detail::CompiledConstraint>& branch,
                   double delta) {
    for (const auto& cc : branch)
        if (!cc.revise(box, delta)) return false;
    return true;
}

bool prune_box(Box& box, const PruneCtx& ctx) {
    for (int pass = 0; pass < ctx.max_passes; ++pass) {
        if (ctx.stats) ++ctx.stats->prune_passes;
        Box before = box;
        for (const CompiledFormula* f : ctx.formulas) {
            for (const auto& leaf : f->leaves)
                if (!leaf.revise(box, ctx.delta)) return false;
            for (const auto& group : f->ors) {
                Box acc;
                bool any = false;
                for (const auto& branch : group) {
                    Box bb = box;
                    if (!revise_branch(bb, branch, ctx.delta)) continue;
                    acc = any ? hull_boxes(acc, bb) : bb;
                    any = true;
                }
                if (!any) return false;
                box = acc;
            }
        }
        if (ctx.flow_contract && !ctx.flow_contract(box)) return false;
        if (box.any_empty()) return false;
        if (!notably_improved(before, box)) break;
    }
    return true;
}

bool certify_box(const Box& box, const PruneCtx& ctx) {
    for (const CompiledFormula* f : ctx.formulas) {
        for (const auto& leaf : f->leaves)
            if (!leaf.certified(box, ctx.delta)) return false;
        for (const auto& group : f->ors) {
            bool any = false;
            for (const auto& branch : group) {
                bool all = true;
                for (const auto& cc : branch)
                    if (!cc.certified(box, ctx.delta)) {
                        all = false;
                        break;
                    }
                if (all) {
                    any = true;
                    break;
                }
            }
            if (!any) return false;
        }
    }
    if (ctx.flow_certify && !ctx.flow_certify(box)) return false;
    return true;
}

// Widest candidate above the split threshold; lowest id wins ties, giving a
// deterministic lexicographic order.
int pick_split_var(const Box& box, const std::vector<int>& candidates,
                   double min_width) {
    int best = -1;
    double best_width = min_width;
    for (int id : candidates) {
        double w = box.v[static_cast<size_t>(id)].width();
        if (w > best_width) {
            best = id;
            best_width = w;
        }
    }
    return best;
}

DeltaResult branch_prune(Box box, const PruneCtx& ctx, const IcpConfig& cfg,
                         const std::vector<int>& branch_vars, Box* witness) {
    double min_width = std::max(cfg.min_split_width_factor * cfg.delta, 1e-12);
    std::vector<Box> stack;
    stack.push_back(std::move(box));
    bool has_unknown_leaf = false;
    size_t explored = 0;
    while (!stack.empty()) {
        if (cfg.should_stop && cfg.should_stop()) return DeltaResult::Unknown;
        if (++explored > cfg.max_boxes) return DeltaResult::Unknown;
        if (ctx.stats) ++ctx.stats->boxes_explored;
        Box b = std::move(stack.back());
        stack.pop_back();
        if (!prune_box(b, ctx)) continue;
        if (certify_box(b, ctx)) {
            if (witness) *witness = std::move(b);
            return DeltaResult::Sat;
        }
        // Relaxed equalities keep chains of variables consistent without
        // ever aligning them, so the whole box may never certify; the box
        // midpoint often does, and a point is itself a valid witness box.
        Box mid = b;
        for (auto& iv : mid.v) iv = Interval(iv.mid(), iv.mid());
        if (certify_box(mid, ctx)) {
            if (witness) *witness = std::move(mid);
            return DeltaResult::Sat;
        }
        int split = pick_split_var(b, branch_vars, min_width);
        if (split < 0) {
            has_unknown_leaf = true;
            continue;
        }
        double m = b.v[static_cast<size_t>(split)].mid();
        Box high = b;
        high.v[static_cast<size_t>(split)].lo = m;
        b.v[static_cast<size_t>(split)].hi = m;
        stack.push_back(std::move(high));
        stack.push_back(std::move(b));
    }
    return has_unknown_leaf ? DeltaResult::Unknown : DeltaResult::Unsat;
}

enum class Tri { True, False, Maybe };

Tri combine_and(Tri a, Tri b) {
    if (a == Tri::False || b == Tri::False) return Tri::False;
    if (a == Tri::True && b == Tri::True) return Tri::True;
    return Tri::Maybe;
}

// Three-valued check of a formula over an interval valuation: True means
// every point satisfies it within delta, False means no point does.
Tri check_formula(const FormulaPtr& f,
                  const std::function<Interval(const std::string&)>& lookup,
                  double delta) {
    switch (f->kind()) {
        case Formula::Kind::True:
            return Tri::True;
        case Formula::Kind::Leaf: {
            Tri acc = Tri::True;
            for (const auto& nc : normalize(f->leaf())) {
                Interval e;
                try {
                    e = eval_interval(nc.term, lookup);
                } catch (const EmptyResultError&) {
                    return Tri::False;
                }
                if (e.is_empty() || e.hi < -delta) return Tri::False;
                acc = combine_and(acc, e.lo >= -delta ? Tri::True : Tri::Maybe);
            }
            return acc;
        }
        case Formula::Kind::And: {
            Tri acc = Tri::True;
            for (const auto& child : f->children()) {
                acc = combine_and(acc, check_formula(child, lookup, delta));
                if (acc == Tri::False) return Tri::False;
            }
            return acc;
        }
        case Formula::Kind::Or: {
            bool all_false = true;
            for (const auto& child : f->children()) {
                Tri r = check_formula(child, lookup, delta);
                if (r == Tri::True) return Tri::True;
                if (r != Tri::False) all_false = false;
            }
            return all_false ? Tri::False : Tri::Maybe;
        }
    }
    return Tri::Maybe;
}

}  // namespace

FlowTube integrate_flow(
    const std::vector<std::pair<std::string, TermPtr>>& derivatives,
    const std::vector<Interval>& init, double horizon, int n_steps,
    const std::vector<Interval>& bounds,
    const std::function<Interval(const std::string&)>& extra_lookup) {
    FlowTube tube;
    tube.n_slabs = n_steps;
    tube.h = n_steps > 0 ? horizon / n_steps : 0.0;
    tube.grid.assign(static_cast<size_t>(n_steps) + 1, {});
    tube.slab.assign(static_cast<size_t>(n_steps), {});
    tube.grid[0] = init;
    if (horizon <= 0.0 || n_steps <= 0) {
        tube.reachable_slabs = 0;
        return tube;
    }
    const size_t nv = derivatives.size();
    auto make_lookup = [&](const std::vector<Interval>& state) {
        return [&derivatives, &state, &extra_lookup](const std::string& name) {
            for (size_t i = 0; i < derivatives.size(); ++i)
                if (derivatives[i].first == name) return state[i];
            if (extra_lookup) return extra_lookup(name);
            throw UnboundVariableError(name);
        };
    };
    auto derivs_at = [&](const std::vector<Interval>& state,
                         std::vector<Interval>& out) {
        auto lookup = make_lookup(state);
        out.resize(nv);
        for (size_t i = 0; i < nv; ++i) {
            out[i] = eval_interval(derivatives[i].second, lookup);
            if (out[i].is_empty()) return false;
        }
        return true;
    };

    const Interval slab_span(0.0, tube.h);
    std::vector<Interval> f(nv);
    for (int m = 0; m < n_steps; ++m) {
        const auto& base = tube.grid[static_cast<size_t>(m)];
        // A-priori enclosure: grow a candidate until it absorbs one Euler
        // slab image of itself.
        std::vector<Interval> enc = base;
        bool contained = false;
        double pad = 1e-9;
        for (int iter = 0; iter < 40 && !contained; ++iter) {
            if (!derivs_at(enc, f)) break;
            contained = true;
            std::vector<Interval> cand(nv);
            for (size_t i = 0; i < nv; ++i) {
                cand[i] = intersect(hull(base[i], iadd(base[i], imul(slab_span, f[i]))),
                                    bounds[i]);
                if (cand[i].is_empty() || !enc[i].contains(cand[i])) contained = false;
            }
            if (contained) {
                enc = std::move(cand);
            } else {
                for (size_t i = 0; i < nv; ++i)
                    enc[i] = intersect(inflate(hull(enc[i], cand[i]), pad), bounds[i]);
                pad *= 4.0;
            }
        }
        if (!contained) {
            tube.reachable_slabs = m;
            return tube;
        }
        tube.slab[static_cast<size_t>(m)] = enc;
        if (!derivs_at(enc, f)) {
            tube.reachable_slabs = m;
            return tube;
        }
        std::vector<Interval> next(nv);
        for (size_t i = 0; i < nv; ++i) {
            next[i] = intersect(iadd(base[i], imul(Interval(tube.h), f[i])), bounds[i]);
            if (next[i].is_empty()) {
                // The state provably leaves its bounds within this slab.
                tube.reachable_slabs = m + 1;
                return tube;
            }
        }
        tube.grid[static_cast<size_t>(m) + 1] = std::move(next);
        tube.reachable_slabs = m + 1;
    }
    return tube;
}

// --- NamedProblem -----------------------------------------------------

void NamedProblem::declare(const std::string& name, Interval bounds) {
    auto it = ids_.find(name);
    if (it != ids_.end()) {
        bounds_[static_cast<size_t>(it->second)] = bounds;
        return;
    }
    ids_[name] = static_cast<int>(names_.size());
    names_.push_back(name);
    bounds_.push_back(bounds);
}

void NamedProblem::constrain(const FormulaPtr& f) {
    auto id_of = [this](const std::string& name) {
        auto it = ids_.find(name);
        if (it == ids_.end()) throw UnboundVariableError(name);
        return it->second;
    };
    formulas_.push_back(detail::compile_formula(f, id_of));
}

BoxValuation NamedProblem::initial_box() const {
    BoxValuation out;
    for (size_t i = 0; i < names_.size(); ++i) out[names_[i]] = bounds_[i];
    return out;
}

namespace {
PruneCtx named_ctx(const std::vector<detail::CompiledFormula>& formulas, double delta,
                   IcpStats* stats) {
    PruneCtx ctx;
    for (const auto& f : formulas) ctx.formulas.push_back(&f);
    ctx.delta = delta;
    ctx.stats = stats;
    return ctx;
}
}  // namespace

bool NamedProblem::prune(BoxValuation& box, double delta) const {
    Box b;
    b.v.resize(names_.size());
    for (size_t i = 0; i < names_.size(); ++i) {
        auto it = box.find(names_[i]);
        b.v[i] = it != box.end() ? it->second : bounds_[i];
    }
    PruneCtx ctx = named_ctx(formulas_, delta, nullptr);
    bool ok = prune_box(b, ctx);
    for (size_t i = 0; i < names_.size(); ++i) box[names_[i]] = b.v[i];
    return ok;
}

bool NamedProblem::certified(const BoxValuation& box, double delta) const {
    Box b;
    b.v.resize(names_.size());
    for (size_t i = 0; i < names_.size(); ++i) {
        auto it = box.find(names_[i]);
        b.v[i] = it != box.end() ? it->second : bounds_[i];
    }
    PruneCtx ctx = named_ctx(formulas_, delta, nullptr);
    return certify_box(b, ctx);
}

DeltaResult NamedProblem::solve(const IcpConfig& cfg, BoxValuation* witness,
                                IcpStats* stats) const {
    Box b;
    b.v = bounds_;
    PruneCtx ctx = named_ctx(formulas_, cfg.delta, stats);
    std::vector<int> branch_vars;
    for (const auto& f : formulas_)
        branch_vars.insert(branch_vars.end(), f.vars.begin(), f.vars.end());
    std::sort(branch_vars.begin(), branch_vars.end());
    branch_vars.erase(std::unique(branch_vars.begin(), branch_vars.end()),
                      branch_vars.end());
    Box w;
    DeltaResult r = branch_prune(std::move(b), ctx, cfg, branch_vars, &w);
    if (r == DeltaResult::Sat && witness) {
        witness->clear();
        for (size_t i = 0; i < names_.size(); ++i) (*witness)[names_[i]] = w.v[i];
    }
    return r;
}

// --- TheorySolver ------------------------------------------------------

TheorySolver::TheorySolver(const ClauseDB& db, IcpConfig cfg)
    : db_(&db), cfg_(std::move(cfg)) {
    auto id_of = [&db](const std::string& name) { return db.num_var(name); };
    compiled_.resize(db.num_bool_vars());
    flow_tasks_.resize(db.num_bool_vars());
    for (size_t v = 0; v < db.num_bool_vars(); ++v) {
        for (const auto& f : db.attached[v])
            compiled_[v].push_back(detail::compile_formula(f, id_of));
        for (const auto& ob : db.ode_attached[v]) {
            const Automaton& a = db.network->automata[static_cast<size_t>(ob.autom)];
            const Mode& m = a.modes[static_cast<size_t>(ob.mode)];
            FlowTask task;
            task.mode = &m;
            task.autom = &a;
            task.step = ob.step;
            task.delay_id = db.delay_id(ob.step);
            for (const auto& [name, deriv] : m.ode->derivatives) {
                task.flowing.push_back(name);
                task.start_ids.push_back(db.start_id(ob.step, name));
                task.end_ids.push_back(db.end_id(ob.step, name));
                for (const auto& [vn, vb] : a.variables)
                    if (vn == name) task.clamp.push_back(vb);
            }
            flow_tasks_[v].push_back(std::move(task));
        }
    }
}

Box TheorySolver::global_box() const {
    Box b;
    b.v.reserve(db_->nvars.size());
    for (const auto& nv : db_->nvars) b.v.push_back(nv.bounds);
    return b;
}

void TheorySolver::gather(const std::vector<int>& active_vars,
                          std::vector<const detail::CompiledFormula*>& formulas,
                          std::vector<const FlowTask*>& flows) const {
    for (int v : active_vars) {
        for (const auto& f : compiled_[static_cast<size_t>(v)]) formulas.push_back(&f);
        for (const auto& t : flow_tasks_[static_cast<size_t>(v)]) flows.push_back(&t);
    }
}

bool TheorySolver::contract_flow(Box& box, const FlowTask& task, double delta) {
    ++stats.flow_integrations;
    Interval delay = box.v[static_cast<size_t>(task.delay_id)];
    if (delay.is_empty()) return false;
    const size_t nv = task.flowing.size();
    if (delay.hi <= 0.0) {
        for (size_t i = 0; i < nv; ++i) {
            Interval both = intersect(box.v[static_cast<size_t>(task.start_ids[i])],
                                      box.v[static_cast<size_t>(task.end_ids[i])]);
            if (both.is_empty()) return false;
            box.v[static_cast<size_t>(task.start_ids[i])] = both;
            box.v[static_cast<size_t>(task.end_ids[i])] = both;
        }
        return true;
    }

    std::vector<Interval> init(nv);
    for (size_t i = 0; i < nv; ++i)
        init[i] = box.v[static_cast<size_t>(task.start_ids[i])];
    auto extra = [this, &box, &task](const std::string& name) {
        return box.v[static_cast<size_t>(db_->start_id(task.step, name))];
    };
    FlowTube tube = integrate_flow(task.mode->ode->derivatives, init, delay.hi,
                                   cfg_.n_flow_steps, task.clamp, extra);

    int usable = tube.reachable_slabs;
    if (task.mode->invariant->kind() != Formula::Kind::True) {
        for (int m = 0; m < usable; ++m) {
            const auto& enc = tube.slab[static_cast<size_t>(m)];
            auto lookup = [this, &box, &task, &enc](const std::string& name) {
                for (size_t i = 0; i < task.flowing.size(); ++i)
                    if (task.flowing[i] == name) return enc[i];
                // Non-flowing variables range between their step endpoints.
                return hull(box.v[static_cast<size_t>(db_->start_id(task.step, name))],
                            box.v[static_cast<size_t>(db_->end_id(task.step, name))]);
            };
            if (check_formula(task.mode->invariant, lookup, delta) == Tri::False) {
                usable = m;
                break;
            }
        }
    }

    double t_hi = usable == tube.n_slabs ? delay.hi : usable * tube.h;
    if (delay.lo > t_hi) return false;
    delay.hi = std::min(delay.hi, t_hi);

    int first = -1, last = -1;
    for (int m = 0; m < usable; ++m) {
        double t0 = m * tube.h;
        double t1 = (m + 1) * tube.h;
        if (t1 < delay.lo || t0 > delay.hi) continue;
        bool compatible = true;
        for (size_t i = 0; i < nv; ++i)
            if (!tube.slab[static_cast<size_t>(m)][i].intersects(
                    box.v[static_cast<size_t>(task.end_ids[i])])) {
                compatible = false;
                break;
            }
        if (compatible) {
            if (first < 0) first = m;
            last = m;
        }
    }
    if (first < 0) return false;
    delay.lo = std::max(delay.lo, first * tube.h);
    delay.hi = std::min(delay.hi, (last + 1) * tube.h);
    if (delay.is_empty()) return false;
    box.v[static_cast<size_t>(task.delay_id)] = delay;

    for (size_t i = 0; i < nv; ++i) {
        Interval h = Interval::empty();
        for (int m = first; m <= last; ++m)
            h = hull(h, tube.slab[static_cast<size_t>(m)][i]);
        Interval& end = box.v[static_cast<size_t>(task.end_ids[i])];
        end = intersect(end, h);
        if (end.is_empty()) return false;
    }
    return true;
}

bool TheorySolver::flow_certified(const Box& box, const FlowTask& task, double delta) {
    Interval delay = box.v[static_cast<size_t>(task.delay_id)];
    const size_t nv = task.flowing.size();
    if (delay.hi <= 0.0) {
        for (size_t i = 0; i < nv; ++i) {
            Interval s = inflate(box.v[static_cast<size_t>(task.start_ids[i])], delta);
            if (!s.contains(box.v[static_cast<size_t>(task.end_ids[i])])) return false;
        }
        return true;
    }
    ++stats.flow_integrations;
    std::vector<Interval> init(nv);
    for (size_t i = 0; i < nv; ++i)
        init[i] = box.v[static_cast<size_t>(task.start_ids[i])];
    auto extra = [this, &box, &task](const std::string& name) {
        return box.v[static_cast<size_t>(db_->start_id(task.step, name))];
    };
    FlowTube tube = integrate_flow(task.mode->ode->derivatives, init, delay.hi,
                                   cfg_.n_flow_steps, task.clamp, extra);
    if (tube.reachable_slabs < tube.n_slabs) return false;

    if (task.mode->invariant->kind() != Formula::Kind::True) {
        for (int m = 0; m < tube.n_slabs; ++m) {
            const auto& enc = tube.slab[static_cast<size_t>(m)];
            auto lookup = [this, &box, &task, &enc](const std::string& name) {
                for (size_t i = 0; i < task.flowing.size(); ++i)
                    if (task.flowing[i] == name) return enc[i];
                return hull(box.v[static_cast<size_t>(db_->start_id(task.step, name))],
                            box.v[static_cast<size_t>(db_->end_id(task.step, name))]);
            };
            if (check_formula(task.mode->invariant, lookup, delta) != Tri::True)
                return false;
        }
    }

    for (size_t i = 0; i < nv; ++i) {
        Interval h = Interval::empty();
        for (int m = 0; m < tube.n_slabs; ++m) {
            double t0 = m * tube.h;
            double t1 = (m + 1) * tube.h;
            if (t1 < delay.lo || t0 > delay.hi) continue;
            h = hull(h, tube.slab[static_cast<size_t>(m)][i]);
        }
        if (!inflate(h, delta).contains(box.v[static_cast<size_t>(task.end_ids[i])]))
            return false;
    }
    return true;
}

bool TheorySolver::prune(Box& box,
                         const std::vector<const detail::CompiledFormula*>& formulas,
                         const std::vector<const FlowTask*>& flows, double delta) {
    PruneCtx ctx;
    ctx.formulas = formulas;
    ctx.delta = delta;
    ctx.stats = &stats;
    if (!flows.empty())
        ctx.flow_contract = [this, &flows, delta](Box& b) {
            for (const FlowTask* t : flows)
                if (!contract_flow(b, *t, delta)) return false;
            return true;
        };
    return prune_box(box, ctx);
}

bool TheorySolver::certify(const Box& box,
                           const std::vector<const detail::CompiledFormula*>& formulas,
                           const std::vector<const FlowTask*>& flows, double delta) {
    PruneCtx ctx;
    ctx.formulas = formulas;
    ctx.delta = delta;
    if (!flows.empty())
        ctx.flow_certify = [this, &flows, delta](const Box& b) {
            for (const FlowTask* t : flows)
                if (!flow_certified(b, *t, delta)) return false;
            return true;
        };
    return certify_box(box, ctx);
}

DeltaResult TheorySolver::branch_and_prune(
    Box box, const std::vector<const detail::CompiledFormula*>& formulas,
    const std::vector<const FlowTask*>& flows) {
    PruneCtx ctx;
    ctx.formulas = formulas;
    ctx.delta = cfg_.delta;
    ctx.stats = &stats;
    if (!flows.empty()) {
        ctx.flow_contract = [this, &flows](Box& b) {
            for (const FlowTask* t : flows)
                if (!contract_flow(b, *t, cfg_.delta)) return false;
            return true;
        };
        ctx.flow_certify = [this, &flows](const Box& b) {
            for (const FlowTask* t : flows)
                if (!flow_certified(b, *t, cfg_.delta)) return false;
            return true;
        };
    }
    std::vector<int> branch_vars;
    for (const auto* f : formulas)
        branch_vars.insert(branch_vars.end(), f->vars.begin(), f->vars.end());
    for (const auto* t : flows) {
        branch_vars.insert(branch_vars.end(), t->start_ids.begin(), t->start_ids.end());
        branch_vars.insert(branch_vars.end(), t->end_ids.begin(), t->end_ids.end());
        branch_vars.push_back(t->delay_id);
    }
    std::sort(branch_vars.begin(), branch_vars.end());
    branch_vars.erase(std::unique(branch_vars.begin(), branch_vars.end()),
                      branch_vars.end());
    return branch_prune(std::move(box), ctx, cfg_, branch_vars, &witness_);
}

DeltaResult TheorySolver::check_vars(const std::vector<int>& active_vars, bool full) {
    ++stats.checks;
    std::vector<const detail::CompiledFormula*> formulas;
    std::vector<const FlowTask*> flows;
    gather(active_vars, formulas, flows);
    Box box = global_box();
    if (!prune(box, formulas, flows, cfg_.delta)) return DeltaResult::Unsat;
    if (certify(box, formulas, flows, cfg_.delta)) {
        witness_ = box;
        return DeltaResult::Sat;
    }
    if (!full) return DeltaResult::Unknown;
    return branch_and_prune(std::move(box), formulas, flows);
}

DeltaResult TheorySolver::quick_check(const std::vector<int>& active_vars) {
    return check_vars(active_vars, false);
}

DeltaResult TheorySolver::full_check(const std::vector<int>& active_vars) {
    return check_vars(active_vars, true);
}

std::vector<int> TheorySolver::explain(const std::vector<int>& active_vars) {
    std::vector<int> core;
    for (int v : active_vars)
        if (!compiled_[static_cast<size_t>(v)].empty() ||
            !flow_tasks_[static_cast<size_t>(v)].empty())
            core.push_back(v);

    // Minimization is best-effort: rerun checks under a small box budget so
    // a single explanation can never dominate the solve; if the conflict
    // does not reproduce cheaply, keep the conservative core.
    size_t saved_boxes = cfg_.max_boxes;
    cfg_.max_boxes = std::min<size_t>(saved_boxes, 2000);
    bool quick_suffices = quick_check(core) == DeltaResult::Unsat;
    if (!quick_suffices && full_check(core) != DeltaResult::Unsat) {
        cfg_.max_boxes = saved_boxes;
        return core;
    }
    if (core.size() <= 40) {
        for (size_t i = core.size(); i-- > 0;) {
            std::vector<int> candidate = core;
            candidate.erase(candidate.begin() + static_cast<long>(i));
            DeltaResult r =
                quick_suffices ? quick_check(candidate) : full_check(candidate);
            if (r == DeltaResult::Unsat) core = std::move(candidate);
        }
    }
    cfg_.max_boxes = saved_boxes;
    return core;
}

}  // namespace hyra
