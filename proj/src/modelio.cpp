// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/modelio.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hyra {

SemanticError::SemanticError(std::vector<Diagnostic> diags_)
    : std::runtime_error([&] {
          std::string msg = "model validation failed:";
          for (const auto& d : diags_) msg += "\n  " + d.str();
          return msg;
      }()),
      diags(std::move(diags_)) {}

namespace sexpr {

const std::string& Node::head() const {
    static const std::string kEmpty;
    if (is_atom || children.empty() || !children[0].is_atom) return kEmpty;
    return children[0].atom;
}

namespace {

struct Lexer {
    const std::string& text;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') {
                while (pos < text.size() && text[pos] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Node parse_node() {
        skip_ws();
        if (pos >= text.size()) throw SyntaxError(line, col, "unexpected end of input");
        Node n;
        n.line = line;
        n.col = col;
        if (text[pos] == '(') {
            advance();
            while (true) {
                skip_ws();
                if (pos >= text.size())
                    throw SyntaxError(line, col, "unterminated list");
                if (text[pos] == ')') {
                    advance();
                    return n;
                }
                n.children.push_back(parse_node());
            }
        }
        if (text[pos] == ')') throw SyntaxError(line, col, "unexpected ')'");
        n.is_atom = true;
        while (pos < text.size()) {
            char c = text[pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
                c == ';')
                break;
            n.atom += c;
            advance();
        }
        return n;
    }
};

}  // namespace

std::vector<Node> parse(const std::string& text) {
    Lexer lex{text};
    std::vector<Node> out;
    while (true) {
        lex.skip_ws();
        if (lex.pos >= text.size()) break;
        out.push_back(lex.parse_node());
    }
    return out;
}

}  // namespace sexpr

namespace {

using sexpr::Node;

[[noreturn]] void fail(const Node& n, const std::string& msg) {
    throw SyntaxError(n.line, n.col, msg);
}

double parse_number(const Node& n) {
    if (!n.is_atom) fail(n, "expected a number");
    try {
        size_t used = 0;
        double v = std::stod(n.atom, &used);
        if (used != n.atom.size()) fail(n, "malformed number '" + n.atom + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(n, "malformed number '" + n.atom + "'");
    } catch (const std::out_of_range&) {
        fail(n, "number out of range '" + n.atom + "'");
    }
}

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    char c = s[0];
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
    if ((c == '-' || c == '+' || c == '.') && s.size() > 1 &&
        (std::isdigit(static_cast<unsigned char>(s[1])) || s[1] == '.'))
        return true;
    return false;
}

// Variable-name mapping per syntactic context.
enum class VarContext {
    Plain,       // instantaneous / guard / init / goal: name -> name
    ClosedForm,  // (start x) -> x@0, (end x) -> x@t, t -> t
    Update,      // name -> name (end of step), (next x) -> x'
};

TermPtr parse_term(const Node& n, VarContext ctx);

TermPtr parse_term_list(const Node& n, VarContext ctx) {
    const std::string& h = n.head();
    auto arity = [&](size_t want) {
        if (n.children.size() != want + 1)
            fail(n, "'" + h + "' expects " + std::to_string(want) + " argument(s)");
    };
    auto arg = [&](size_t i) { return parse_term(n.children[i + 1], ctx); };
    if (h == "+") {
        if (n.children.size() < 3) fail(n, "'+' expects at least 2 arguments");
        TermPtr acc = arg(0);
        for (size_t i = 2; i < n.children.size(); ++i)
            acc = add(acc, parse_term(n.children[i], ctx));
        return acc;
    }
    if (h == "-") {
        if (n.children.size() == 2) return neg(arg(0));
        arity(2);
        return sub(arg(0), arg(1));
    }
    if (h == "*") {
        if (n.children.size() < 3) fail(n, "'*' expects at least 2 arguments");
        TermPtr acc = arg(0);
        for (size_t i = 2; i < n.children.size(); ++i)
            acc = mul(acc, parse_term(n.children[i], ctx));
        return acc;
    }
    if (h == "/") {
        arity(2);
        return div(arg(0), arg(1));
    }
    if (h == "neg") {
        arity(1);
        return neg(arg(0));
    }
    if (h == "pow") {
        arity(2);
        double e = parse_number(n.children[2]);
        if (e < 0 || e != static_cast<int>(e))
            fail(n.children[2], "pow exponent must be a non-negative integer");
        return pow(arg(0), static_cast<int>(e));
    }
    if (h == "sin") { arity(1); return sin(arg(0)); }
    if (h == "cos") { arity(1); return cos(arg(0)); }
    if (h == "exp") { arity(1); return exp(arg(0)); }
    if (h == "sqrt") { arity(1); return sqrt(arg(0)); }
    if (h == "min") { arity(2); return min(arg(0), arg(1)); }
    if (h == "max") { arity(2); return max(arg(0), arg(1)); }
    if (h == "start" || h == "end") {
        if (ctx != VarContext::ClosedForm)
            fail(n, "'" + h + "' is only valid inside a closed-form flow");
        arity(1);
        if (!n.children[1].is_atom) fail(n.children[1], "expected a variable name");
        return var(n.children[1].atom + (h == "start" ? "@0" : "@t"));
    }
    if (h == "next") {
        if (ctx != VarContext::Update)
            fail(n, "'next' is only valid inside a jump update");
        arity(1);
        if (!n.children[1].is_atom) fail(n.children[1], "expected a variable name");
        return var(n.children[1].atom + "'");
    }
    fail(n, "unknown function '" + h + "'");
}

TermPtr parse_term(const Node& n, VarContext ctx) {
    if (n.is_atom) {
        if (looks_numeric(n.atom)) return constant(parse_number(n));
        return var(n.atom);
    }
    if (n.children.empty() || !n.children[0].is_atom) fail(n, "expected a term");
    return parse_term_list(n, ctx);
}

FormulaPtr parse_formula(const Node& n, VarContext ctx) {
    if (n.is_atom) {
        if (n.atom == "true") return Formula::truth();
        fail(n, "expected a formula");
    }
    const std::string& h = n.head();
    if (h == "and" || h == "or") {
        std::vector<FormulaPtr> kids;
        for (size_t i = 1; i < n.children.size(); ++i)
            kids.push_back(parse_formula(n.children[i], ctx));
        if (kids.empty()) fail(n, "'" + h + "' expects at least one formula");
        return h == "and" ? conj(std::move(kids)) : disj(std::move(kids));
    }
    Rel rel;
    if (h == ">") rel = Rel::Gt;
    else if (h == ">=") rel = Rel::Ge;
    else if (h == "=") rel = Rel::Eq;
    else if (h == "<=") rel = Rel::Le;
    else if (h == "<") rel = Rel::Lt;
    else fail(n, "unknown formula keyword '" + h + "'");
    if (n.children.size() != 3) fail(n, "'" + h + "' expects 2 arguments");
    return atom(Constraint{parse_term(n.children[1], ctx), rel,
                           parse_term(n.children[2], ctx)});
}

Mode parse_mode(const Node& n) {
    if (n.children.size() < 2 || !n.children[1].is_atom) fail(n, "mode needs a name");
    Mode m;
    m.name = n.children[1].atom;
    m.invariant = Formula::truth();
    std::vector<FormulaPtr> invs;
    for (size_t i = 2; i < n.children.size(); ++i) {
        const Node& part = n.children[i];
        const std::string& h = part.head();
        if (h == "flow") {
            if (part.children.size() != 2) fail(part, "flow expects one body");
            const Node& body = part.children[1];
            const std::string& bh = body.head();
            if (bh == "ode") {
                OdeFlow f;
                for (size_t j = 1; j < body.children.size(); ++j) {
                    const Node& d = body.children[j];
                    if (d.head() != "d/dt" || d.children.size() != 3 ||
                        !d.children[1].is_atom)
                        fail(d, "expected (d/dt <var> <term>)");
                    f.derivatives.emplace_back(d.children[1].atom,
                                               parse_term(d.children[2], VarContext::Plain));
                }
                m.ode = std::move(f);
            } else if (bh == "closed-form") {
                if (body.children.size() != 2) fail(body, "closed-form expects one formula");
                m.closed_form =
                    ClosedFormFlow{parse_formula(body.children[1], VarContext::ClosedForm)};
            } else {
                fail(body, "flow must be (ode ...) or (closed-form ...)");
            }
        } else if (h == "inv") {
            if (part.children.size() != 2) fail(part, "inv expects one formula");
            invs.push_back(parse_formula(part.children[1], VarContext::Plain));
        } else {
            fail(part, "unknown mode section '" + h + "'");
        }
    }
    if (!invs.empty()) m.invariant = conj(std::move(invs));
    return m;
}

Jump parse_jump(const Node& n) {
    if (n.children.size() < 3 || !n.children[1].is_atom || !n.children[2].is_atom)
        fail(n, "jump needs from and to mode names");
    Jump j;
    j.from = n.children[1].atom;
    j.to = n.children[2].atom;
    j.guard = Formula::truth();
    j.update = Formula::truth();
    for (size_t i = 3; i < n.children.size(); ++i) {
        const Node& part = n.children[i];
        const std::string& h = part.head();
        if (h == "labels") {
            for (size_t l = 1; l < part.children.size(); ++l) {
                if (!part.children[l].is_atom) fail(part.children[l], "expected a label");
                j.labels.insert(part.children[l].atom);
            }
        } else if (h == "guard") {
            if (part.children.size() != 2) fail(part, "guard expects one formula");
            j.guard = parse_formula(part.children[1], VarContext::Plain);
        } else if (h == "update") {
            if (part.children.size() != 2) fail(part, "update expects one formula");
            j.update = parse_formula(part.children[1], VarContext::Update);
        } else {
            fail(part, "unknown jump section '" + h + "'");
        }
    }
    return j;
}

Automaton parse_automaton(const Node& n) {
    if (n.children.size() < 2 || !n.children[1].is_atom)
        fail(n, "automaton needs a name");
    Automaton a;
    a.name = n.children[1].atom;
    for (size_t i = 2; i < n.children.size(); ++i) {
        const Node& part = n.children[i];
        const std::string& h = part.head();
        if (h == "vars") {
            for (size_t v = 1; v < part.children.size(); ++v) {
                const Node& vd = part.children[v];
                if (vd.is_atom || vd.children.size() != 3 || !vd.children[0].is_atom)
                    fail(vd, "expected (<name> <lo> <hi>)");
                a.variables.emplace_back(
                    vd.children[0].atom,
                    Interval(parse_number(vd.children[1]), parse_number(vd.children[2])));
            }
        } else if (h == "reads") {
            for (size_t v = 1; v < part.children.size(); ++v) {
                if (!part.children[v].is_atom) fail(part.children[v], "expected a name");
                a.reads.push_back(part.children[v].atom);
            }
        } else if (h == "alphabet") {
            for (size_t v = 1; v < part.children.size(); ++v) {
                if (!part.children[v].is_atom) fail(part.children[v], "expected a label");
                a.alphabet.insert(part.children[v].atom);
            }
        } else if (h == "mode") {
            a.modes.push_back(parse_mode(part));
        } else if (h == "jump") {
            a.jumps.push_back(parse_jump(part));
        } else if (h == "init") {
            if (part.children.size() < 2 || !part.children[1].is_atom)
                fail(part, "init needs a mode name");
            InitEntry e;
            e.mode = part.children[1].atom;
            e.condition = Formula::truth();
            if (part.children.size() == 3)
                e.condition = parse_formula(part.children[2], VarContext::Plain);
            else if (part.children.size() > 3)
                fail(part, "init expects at most one formula");
            a.init.push_back(std::move(e));
        } else {
            fail(part, "unknown automaton section '" + h + "'");
        }
    }
    return a;
}

Goal parse_goal(const Node& n) {
    Goal g;
    g.predicate = Formula::truth();
    for (size_t i = 1; i < n.children.size(); ++i) {
        const Node& part = n.children[i];
        const std::string& h = part.head();
        if (h == "modes") {
            for (size_t m = 1; m < part.children.size(); ++m) {
                const Node& e = part.children[m];
                if (e.is_atom || e.children.size() != 2 || !e.children[0].is_atom ||
                    !e.children[1].is_atom)
                    fail(e, "expected (<automaton> <mode>)");
                g.target_modes[e.children[0].atom] = e.children[1].atom;
            }
        } else if (h == "pred") {
            if (part.children.size() != 2) fail(part, "pred expects one formula");
            g.predicate = parse_formula(part.children[1], VarContext::Plain);
        } else {
            fail(part, "unknown goal section '" + h + "'");
        }
    }
    return g;
}

}  // namespace

ModelDocument parse_model(const std::string& text) {
    std::vector<Node> top = sexpr::parse(text);
    ModelDocument doc;
    bool saw_network = false, saw_goal = false;
    for (const Node& n : top) {
        const std::string& h = n.head();
        if (h == "network") {
            saw_network = true;
            for (size_t i = 1; i < n.children.size(); ++i) {
                const Node& part = n.children[i];
                const std::string& ph = part.head();
                if (ph == "automaton") {
                    doc.network.automata.push_back(parse_automaton(part));
                } else if (ph == "defaults") {
                    for (size_t d = 1; d < part.children.size(); ++d) {
                        const Node& e = part.children[d];
                        if (e.is_atom || e.children.size() != 2 || !e.children[0].is_atom)
                            fail(e, "expected (<key> <value>)");
                        const std::string& key = e.children[0].atom;
                        double v = parse_number(e.children[1]);
                        if (key == "k") doc.default_k = static_cast<int>(v);
                        else if (key == "M") doc.default_max_delay = v;
                        else if (key == "delta") doc.default_delta = v;
                        else fail(e, "unknown default '" + key + "'");
                    }
                } else {
                    fail(part, "unknown network section '" + ph + "'");
                }
            }
        } else if (h == "goal") {
            saw_goal = true;
            doc.goal = parse_goal(n);
        } else {
            fail(n, "unknown top-level section '" + h + "'");
        }
    }
    if (!saw_network) throw SyntaxError(1, 1, "missing (network ...) section");
    if (!saw_goal) doc.goal.predicate = Formula::truth();
    (void)saw_goal;
    if (doc.default_k < 0 || doc.default_max_delay <= 0.0 || doc.default_delta <= 0.0)
        throw SyntaxError(1, 1, "defaults must satisfy k >= 0, M > 0, delta > 0");

    auto diags = validate(doc.network, doc.goal);
    if (!diags.empty()) throw SemanticError(std::move(diags));
    return doc;
}

ModelDocument parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

namespace {

void put_interval(std::ostream& os, const Interval& iv) {
    os.precision(17);
    os << iv.lo << " " << iv.hi;
}

Interval read_interval(const Node& n, size_t at) {
    return Interval(parse_number(n.children[at]), parse_number(n.children[at + 1]));
}

}  // namespace

std::string serialize_witness(const CompositeRun& run) {
    std::ostringstream os;
    os.precision(17);
    os << "(run\n";
    for (size_t i = 0; i < run.states.size(); ++i) {
        const auto& st = run.states[i];
        os << "  (state (duration ";
        put_interval(os, st.duration);
        os << ")\n    (modes";
        for (const auto& m : st.modes) os << " " << m;
        os << ")\n    (start";
        for (const auto& [name, iv] : st.start_values) {
            os << " (" << name << " ";
            put_interval(os, iv);
            os << ")";
        }
        os << ")\n    (end";
        for (const auto& [name, iv] : st.end_values) {
            os << " (" << name << " ";
            put_interval(os, iv);
            os << ")";
        }
        os << "))\n";
        if (i < run.labels.size()) {
            os << "  (labels";
            for (const auto& l : run.labels[i]) os << " " << l;
            os << ")\n";
        }
    }
    os << ")\n";
    return os.str();
}

CompositeRun parse_witness(const std::string& text) {
    std::vector<Node> top = sexpr::parse(text);
    if (top.size() != 1 || top[0].head() != "run")
        throw SyntaxError(1, 1, "expected a single (run ...) document");
    CompositeRun run;
    for (size_t i = 1; i < top[0].children.size(); ++i) {
        const Node& n = top[0].children[i];
        const std::string& h = n.head();
        if (h == "state") {
            CompositeState st;
            for (size_t j = 1; j < n.children.size(); ++j) {
                const Node& part = n.children[j];
                const std::string& ph = part.head();
                if (ph == "duration") {
                    st.duration = read_interval(part, 1);
                } else if (ph == "modes") {
                    for (size_t m = 1; m < part.children.size(); ++m)
                        st.modes.push_back(part.children[m].atom);
                } else if (ph == "start" || ph == "end") {
                    auto& dst = ph == "start" ? st.start_values : st.end_values;
                    for (size_t m = 1; m < part.children.size(); ++m) {
                        const Node& e = part.children[m];
                        if (e.is_atom || e.children.size() != 3)
                            fail(e, "expected (<var> <lo> <hi>)");
                        dst[e.children[0].atom] = read_interval(e, 1);
                    }
                } else {
                    fail(part, "unknown state section '" + ph + "'");
                }
            }
            run.states.push_back(std::move(st));
        } else if (h == "labels") {
            std::set<std::string> labels;
            for (size_t m = 1; m < n.children.size(); ++m)
                labels.insert(n.children[m].atom);
            run.labels.push_back(std::move(labels));
        } else {
            fail(n, "unknown run section '" + h + "'");
        }
    }
    return run;
}

}  // namespace hyra
