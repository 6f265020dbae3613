// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hyra/interval.hpp"

namespace hyra {

struct UnboundVariableError : std::runtime_error {
    explicit UnboundVariableError(const std::string& name)
        : std::runtime_error("unbound variable: " + name), variable(name) {}
    std::string variable;
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by interval evaluation when a term is undefined on the whole box
/// (e.g. sqrt of an entirely negative interval).
struct EmptyResultError : std::runtime_error {
    explicit EmptyResultError(const std::string& what) : std::runtime_error(what) {}
};

enum class Fn { Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Sqrt, Min, Max };

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// Real-valued term: constant, variable, or function application over the
/// fixed function set above.  Immutable; freely shared.
class Term {
  public:
    struct App {
        Fn fn;
        std::vector<TermPtr> args;
        int exponent = 0;  // Pow only, >= 0
    };

    explicit Term(double c) : node_(c) {}
    explicit Term(std::string name) : node_(std::move(name)) {}
    explicit Term(App app) : node_(std::move(app)) {}

    bool is_constant() const { return std::holds_alternative<double>(node_); }
    bool is_variable() const { return std::holds_alternative<std::string>(node_); }
    bool is_app() const { return std::holds_alternative<App>(node_); }
    double constant() const { return std::get<double>(node_); }
    const std::string& variable() const { return std::get<std::string>(node_); }
    const App& app() const { return std::get<App>(node_); }

  private:
    std::variant<double, std::string, App> node_;
};

// Builders.
TermPtr constant(double c);
TermPtr var(std::string name);
TermPtr add(TermPtr a, TermPtr b);
TermPtr sub(TermPtr a, TermPtr b);
TermPtr mul(TermPtr a, TermPtr b);
TermPtr div(TermPtr a, TermPtr b);
TermPtr neg(TermPtr a);
TermPtr pow(TermPtr a, int n);
TermPtr sin(TermPtr a);
TermPtr cos(TermPtr a);
TermPtr exp(TermPtr a);
TermPtr sqrt(TermPtr a);
TermPtr min(TermPtr a, TermPtr b);
TermPtr max(TermPtr a, TermPtr b);

bool structurally_equal(const TermPtr& a, const TermPtr& b);
std::string to_sexpr(const TermPtr& t);

enum class Rel { Gt, Ge, Eq, Le, Lt };

struct Constraint {
    TermPtr lhs;
    Rel rel = Rel::Ge;
    TermPtr rhs;
};

/// Normal form t >= 0 (strict=false) or t > 0 (strict=true); equality
/// splits into two opposing >= constraints.
struct NormConstraint {
    TermPtr term;
    bool strict = false;
};

std::vector<NormConstraint> normalize(const Constraint& c);

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Quantifier-free formula: constraint leaves under conjunction and
/// disjunction.  The encoder owns all quantifier structure.
class Formula {
  public:
    enum class Kind { Leaf, And, Or, True };

    explicit Formula(Constraint c) : kind_(Kind::Leaf), leaf_(std::move(c)) {}
    Formula(Kind k, std::vector<FormulaPtr> kids)
        : kind_(k), children_(std::move(kids)) {}
    static FormulaPtr truth();

    Kind kind() const { return kind_; }
    const Constraint& leaf() const { return leaf_; }
    const std::vector<FormulaPtr>& children() const { return children_; }

  private:
    Kind kind_;
    Constraint leaf_{nullptr, Rel::Ge, nullptr};
    std::vector<FormulaPtr> children_;
};

FormulaPtr atom(Constraint c);
FormulaPtr conj(std::vector<FormulaPtr> fs);
FormulaPtr disj(std::vector<FormulaPtr> fs);

using PointValuation = std::map<std::string, double>;
using BoxValuation = std::map<std::string, Interval>;

double eval_point(const TermPtr& t, const PointValuation& v);
Interval eval_interval(const TermPtr& t, const BoxValuation& box);
// Generic lookup variant used by the solver, where variables live in an
// indexed box rather than a name map.
Interval eval_interval(const TermPtr& t,
                       const std::function<Interval(const std::string&)>& lookup);

void collect_free_vars(const TermPtr& t, std::set<std::string>& out);
std::set<std::string> free_vars(const TermPtr& t);
std::set<std::string> free_vars(const FormulaPtr& f);

// Rename every variable through `map`; names absent from the map are kept.
TermPtr rename_vars(const TermPtr& t, const std::map<std::string, std::string>& map);
FormulaPtr rename_vars(const FormulaPtr& f, const std::map<std::string, std::string>& map);

std::string to_sexpr(const FormulaPtr& f);

}  // namespace hyra
