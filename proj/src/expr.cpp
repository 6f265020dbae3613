// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/expr.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace hyra {

namespace {

TermPtr app2(Fn fn, TermPtr a, TermPtr b) {
    Term::App ap;
    ap.fn = fn;
    ap.args = {std::move(a), std::move(b)};
    return std::make_shared<Term>(std::move(ap));
}

TermPtr app1(Fn fn, TermPtr a) {
    Term::App ap;
    ap.fn = fn;
    ap.args = {std::move(a)};
    return std::make_shared<Term>(std::move(ap));
}

}  // namespace

TermPtr constant(double c) { return std::make_shared<Term>(c); }
TermPtr var(std::string name) {
    assert(!name.empty());
    return std::make_shared<Term>(std::move(name));
}
TermPtr add(TermPtr a, TermPtr b) { return app2(Fn::Add, std::move(a), std::move(b)); }
TermPtr sub(TermPtr a, TermPtr b) { return app2(Fn::Sub, std::move(a), std::move(b)); }
TermPtr mul(TermPtr a, TermPtr b) { return app2(Fn::Mul, std::move(a), std::move(b)); }
TermPtr div(TermPtr a, TermPtr b) { return app2(Fn::Div, std::move(a), std::move(b)); }
TermPtr neg(TermPtr a) { return app1(Fn::Neg, std::move(a)); }
TermPtr pow(TermPtr a, int n) {
    if (n < 0) throw DomainError("pow exponent must be >= 0");
    Term::App ap;
    ap.fn = Fn::Pow;
    ap.args = {std::move(a)};
    ap.exponent = n;
    return std::make_shared<Term>(std::move(ap));
}
TermPtr sin(TermPtr a) { return app1(Fn::Sin, std::move(a)); }
TermPtr cos(TermPtr a) { return app1(Fn::Cos, std::move(a)); }
TermPtr exp(TermPtr a) { return app1(Fn::Exp, std::move(a)); }
TermPtr sqrt(TermPtr a) { return app1(Fn::Sqrt, std::move(a)); }
TermPtr min(TermPtr a, TermPtr b) { return app2(Fn::Min, std::move(a), std::move(b)); }
TermPtr max(TermPtr a, TermPtr b) { return app2(Fn::Max, std::move(a), std::move(b)); }

bool structurally_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->is_constant() && b->is_constant()) return a->constant() == b->constant();
    if (a->is_variable() && b->is_variable()) return a->variable() == b->variable();
    if (a->is_app() && b->is_app()) {
        const auto& x = a->app();
        const auto& y = b->app();
        if (x.fn != y.fn || x.exponent != y.exponent || x.args.size() != y.args.size())
            return false;
        for (size_t i = 0; i < x.args.size(); ++i)
            if (!structurally_equal(x.args[i], y.args[i])) return false;
        return true;
    }
    return false;
}

double eval_point(const TermPtr& t, const PointValuation& v) {
    if (t->is_constant()) return t->constant();
    if (t->is_variable()) {
        auto it = v.find(t->variable());
        if (it == v.end()) throw UnboundVariableError(t->variable());
        return it->second;
    }
    const auto& ap = t->app();
    auto arg = [&](size_t i) { return eval_point(ap.args[i], v); };
    double r;
    switch (ap.fn) {
        case Fn::Add: r = arg(0) + arg(1); break;
        case Fn::Sub: r = arg(0) - arg(1); break;
        case Fn::Mul: r = arg(0) * arg(1); break;
        case Fn::Div: {
            double d = arg(1);
            if (d == 0.0) throw DomainError("division by zero");
            r = arg(0) / d;
            break;
        }
        case Fn::Neg: r = -arg(0); break;
        case Fn::Pow: r = std::pow(arg(0), ap.exponent); break;
        case Fn::Sin: r = std::sin(arg(0)); break;
        case Fn::Cos: r = std::cos(arg(0)); break;
        case Fn::Exp: r = std::exp(arg(0)); break;
        case Fn::Sqrt: {
            double a = arg(0);
            if (a < 0.0) throw DomainError("sqrt of negative value");
            r = std::sqrt(a);
            break;
        }
        case Fn::Min: r = std::min(arg(0), arg(1)); break;
        case Fn::Max: r = std::max(arg(0), arg(1)); break;
        default: throw DomainError("unknown function");
    }
    if (std::isnan(r)) throw DomainError("evaluation produced NaN");
    return r;
}

Interval eval_interval(const TermPtr& t,
                       const std::function<Interval(const std::string&)>& lookup) {
    if (t->is_constant()) return Interval(t->constant());
    if (t->is_variable()) {
        Interval iv = lookup(t->variable());
        if (iv.is_empty()) throw EmptyResultError("empty interval for " + t->variable());
        return iv;
    }
    const auto& ap = t->app();
    auto arg = [&](size_t i) { return eval_interval(ap.args[i], lookup); };
    Interval r;
    switch (ap.fn) {
        case Fn::Add: r = iadd(arg(0), arg(1)); break;
        case Fn::Sub: r = isub(arg(0), arg(1)); break;
        case Fn::Mul:
            // x * x evaluated as a square avoids the dependency blowup;
            // this is needed for drag-style terms like 0.1*v*v.
            if (structurally_equal(ap.args[0], ap.args[1]))
                r = isquare(arg(0));
            else
                r = imul(arg(0), arg(1));
            break;
        case Fn::Div: r = idiv(arg(0), arg(1)); break;
        case Fn::Neg: r = ineg(arg(0)); break;
        case Fn::Pow: r = ipow(arg(0), ap.exponent); break;
        case Fn::Sin: r = isin(arg(0)); break;
        case Fn::Cos: r = icos(arg(0)); break;
        case Fn::Exp: r = iexp(arg(0)); break;
        case Fn::Sqrt: r = isqrt(arg(0)); break;
        case Fn::Min: r = imin(arg(0), arg(1)); break;
        case Fn::Max: r = imax(arg(0), arg(1)); break;
        default: throw DomainError("unknown function");
    }
    if (r.is_empty()) throw EmptyResultError("term undefined on the whole box");
    return r;
}

Interval eval_interval(const TermPtr& t, const BoxValuation& box) {
    return eval_interval(t, [&](const std::string& name) -> Interval {
        auto it = box.find(name);
        if (it == box.end()) throw UnboundVariableError(name);
        return it->second;
    });
}

void collect_free_vars(const TermPtr& t, std::set<std::string>& out) {
    if (t->is_variable()) {
        out.insert(t->variable());
    } else if (t->is_app()) {
        for (const auto& a : t->app().args) collect_free_vars(a, out);
    }
}

std::set<std::string> free_vars(const TermPtr& t) {
    std::set<std::string> s;
    collect_free_vars(t, s);
    return s;
}

std::set<std::string> free_vars(const FormulaPtr& f) {
    std::set<std::string> s;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        if (g->kind() == Formula::Kind::Leaf) {
            collect_free_vars(g->leaf().lhs, s);
            collect_free_vars(g->leaf().rhs, s);
        } else {
            for (const auto& c : g->children()) walk(c);
        }
    };
    walk(f);
    return s;
}

std::vector<NormConstraint> normalize(const Constraint& c) {
    switch (c.rel) {
        case Rel::Gt: return {{sub(c.lhs, c.rhs), true}};
        case Rel::Ge: return {{sub(c.lhs, c.rhs), false}};
        case Rel::Lt: return {{sub(c.rhs, c.lhs), true}};
        case Rel::Le: return {{sub(c.rhs, c.lhs), false}};
        case Rel::Eq:
            return {{sub(c.lhs, c.rhs), false}, {sub(c.rhs, c.lhs), false}};
    }
    return {};
}

FormulaPtr Formula::truth() {
    static FormulaPtr t = std::make_shared<Formula>(Kind::True, std::vector<FormulaPtr>{});
    return t;
}

FormulaPtr atom(Constraint c) { return std::make_shared<Formula>(std::move(c)); }

FormulaPtr conj(std::vector<FormulaPtr> fs) {
    std::vector<FormulaPtr> kept;
    for (auto& f : fs)
        if (f->kind() != Formula::Kind::True) kept.push_back(std::move(f));
    if (kept.empty()) return Formula::truth();
    if (kept.size() == 1) return kept[0];
    return std::make_shared<Formula>(Formula::Kind::And, std::move(kept));
}

FormulaPtr disj(std::vector<FormulaPtr> fs) {
    if (fs.empty()) return Formula::truth();
    if (fs.size() == 1) return fs[0];
    return std::make_shared<Formula>(Formula::Kind::Or, std::move(fs));
}

TermPtr rename_vars(const TermPtr& t, const std::map<std::string, std::string>& map) {
    if (t->is_constant()) return t;
    if (t->is_variable()) {
        auto it = map.find(t->variable());
        return it == map.end() ? t : var(it->second);
    }
    Term::App ap = t->app();
    for (auto& a : ap.args) a = rename_vars(a, map);
    return std::make_shared<Term>(std::move(ap));
}

FormulaPtr rename_vars(const FormulaPtr& f, const std::map<std::string, std::string>& map) {
    if (f->kind() == Formula::Kind::True) return f;
    if (f->kind() == Formula::Kind::Leaf) {
        Constraint c = f->leaf();
        c.lhs = rename_vars(c.lhs, map);
        c.rhs = rename_vars(c.rhs, map);
        return atom(std::move(c));
    }
    std::vector<FormulaPtr> kids;
    kids.reserve(f->children().size());
    for (const auto& k : f->children()) kids.push_back(rename_vars(k, map));
    return std::make_shared<Formula>(f->kind(), std::move(kids));
}

namespace {

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Add: return "+";
        case Fn::Sub: return "-";
        case Fn::Mul: return "*";
        case Fn::Div: return "/";
        case Fn::Neg: return "neg";
        case Fn::Pow: return "pow";
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Exp: return "exp";
        case Fn::Sqrt: return "sqrt";
        case Fn::Min: return "min";
        case Fn::Max: return "max";
    }
    return "?";
}

const char* rel_name(Rel r) {
    switch (r) {
        case Rel::Gt: return ">";
        case Rel::Ge: return ">=";
        case Rel::Eq: return "=";
        case Rel::Le: return "<=";
        case Rel::Lt: return "<";
    }
    return "?";
}

}  // namespace

std::string to_sexpr(const TermPtr& t) {
    if (t->is_constant()) {
        std::ostringstream os;
        os.precision(17);
        os << t->constant();
        return os.str();
    }
    if (t->is_variable()) return t->variable();
    const auto& ap = t->app();
    std::ostringstream os;
    os << "(" << fn_name(ap.fn);
    if (ap.fn == Fn::Pow) os << " " << to_sexpr(ap.args[0]) << " " << ap.exponent;
    else
        for (const auto& a : ap.args) os << " " << to_sexpr(a);
    os << ")";
    return os.str();
}

std::string to_sexpr(const FormulaPtr& f) {
    switch (f->kind()) {
        case Formula::Kind::True: return "true";
        case Formula::Kind::Leaf: {
            std::ostringstream os;
            os << "(" << rel_name(f->leaf().rel) << " " << to_sexpr(f->leaf().lhs)
               << " " << to_sexpr(f->leaf().rhs) << ")";
            return os.str();
        }
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::ostringstream os;
            os << (f->kind() == Formula::Kind::And ? "(and" : "(or");
            for (const auto& k : f->children()) os << " " << to_sexpr(k);
            os << ")";
            return os.str();
        }
    }
    return "?";
}

}  // namespace hyra
