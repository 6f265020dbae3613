// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/model.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace hyra {

int Automaton::mode_index(const std::string& mode_name) const {
    for (size_t i = 0; i < modes.size(); ++i)
        if (modes[i].name == mode_name) return static_cast<int>(i);
    return -1;
}

bool Automaton::owns(const std::string& variable) const {
    return std::any_of(variables.begin(), variables.end(),
                       [&](const auto& v) { return v.first == variable; });
}

int Network::automaton_index(const std::string& name) const {
    for (size_t i = 0; i < automata.size(); ++i)
        if (automata[i].name == name) return static_cast<int>(i);
    return -1;
}

std::map<std::string, Interval> Network::all_variables() const {
    std::map<std::string, Interval> out;
    for (const auto& a : automata)
        for (const auto& [name, bounds] : a.variables) out.emplace(name, bounds);
    return out;
}

std::set<std::string> Network::union_alphabet() const {
    std::set<std::string> out;
    for (const auto& a : automata) out.insert(a.alphabet.begin(), a.alphabet.end());
    return out;
}

bool CompositeRun::operator==(const CompositeRun& other) const {
    if (labels != other.labels || states.size() != other.states.size()) return false;
    for (size_t i = 0; i < states.size(); ++i) {
        const auto& a = states[i];
        const auto& b = other.states[i];
        if (a.modes != b.modes || a.duration != b.duration ||
            a.start_values != b.start_values || a.end_values != b.end_values)
            return false;
    }
    return true;
}

std::string Diagnostic::str() const {
    std::ostringstream os;
    if (!automaton.empty()) os << automaton << ": ";
    if (!locus.empty()) os << locus << ": ";
    os << message;
    return os.str();
}

namespace {

void check_var_scope(const FormulaPtr& f, const std::set<std::string>& allowed,
                     const std::string& autom, const std::string& locus,
                     std::vector<Diagnostic>& out) {
    for (const auto& v : free_vars(f))
        if (!allowed.count(v))
            out.push_back({autom, locus, "unbound variable '" + v + "'"});
}

}  // namespace

std::vector<Diagnostic> validate(const Network& network, const Goal& goal) {
    std::vector<Diagnostic> diags;

    std::set<std::string> automaton_names;
    for (const auto& a : network.automata) {
        if (!automaton_names.insert(a.name).second)
            diags.push_back({a.name, "", "duplicate automaton name"});
    }

    // Variable ownership: exactly one owner per name.
    std::map<std::string, std::string> owner;
    for (const auto& a : network.automata)
        for (const auto& [v, bounds] : a.variables) {
            if (bounds.is_empty() || bounds.lo > bounds.hi)
                diags.push_back({a.name, "var " + v, "empty bounds"});
            auto [it, fresh] = owner.emplace(v, a.name);
            if (!fresh)
                diags.push_back({a.name, "var " + v,
                                 "already owned by automaton '" + it->second + "'"});
        }

    std::set<std::string> all_names;
    for (const auto& [v, o] : owner) all_names.insert(v);

    for (const auto& a : network.automata) {
        std::set<std::string> readable;
        for (const auto& [v, b] : a.variables) readable.insert(v);
        for (const auto& r : a.reads) {
            if (!owner.count(r))
                diags.push_back({a.name, "reads " + r, "no automaton owns this variable"});
            readable.insert(r);
        }
        std::set<std::string> owned;
        for (const auto& [v, b] : a.variables) owned.insert(v);

        std::set<std::string> mode_names;
        if (a.modes.empty()) diags.push_back({a.name, "", "automaton has no modes"});
        for (const auto& m : a.modes) {
            if (!mode_names.insert(m.name).second)
                diags.push_back({a.name, "mode " + m.name, "duplicate mode name"});
            if (m.ode && m.closed_form)
                diags.push_back({a.name, "mode " + m.name,
                                 "mode declares both ode and closed-form flow"});
            if (m.ode) {
                for (const auto& [v, deriv] : m.ode->derivatives) {
                    if (!owned.count(v))
                        diags.push_back({a.name, "mode " + m.name,
                                         "ode for non-owned variable '" + v + "'"});
                    for (const auto& fv : free_vars(deriv))
                        if (!owned.count(fv))
                            diags.push_back({a.name, "mode " + m.name,
                                             "ode derivative mentions non-owned '" + fv + "'"});
                }
            }
            if (m.closed_form) {
                std::set<std::string> allowed{"t"};
                for (const auto& v : readable) {
                    allowed.insert(v + "@0");
                    allowed.insert(v + "@t");
                }
                check_var_scope(m.closed_form->relation, allowed, a.name,
                                "mode " + m.name + " flow", diags);
            }
            check_var_scope(m.invariant, readable, a.name, "mode " + m.name + " inv",
                            diags);
        }

        for (const auto& j : a.jumps) {
            std::string locus = "jump " + j.from + "->" + j.to;
            if (a.mode_index(j.from) < 0)
                diags.push_back({a.name, locus, "unknown mode '" + j.from + "'"});
            if (a.mode_index(j.to) < 0)
                diags.push_back({a.name, locus, "unknown mode '" + j.to + "'"});
            check_var_scope(j.guard, readable, a.name, locus + " guard", diags);
            std::set<std::string> upd_allowed = readable;
            for (const auto& v : owned) upd_allowed.insert(v + "'");
            check_var_scope(j.update, upd_allowed, a.name, locus + " update", diags);
        }

        if (a.init.empty())
            diags.push_back({a.name, "", "automaton has no init entry"});
        for (const auto& e : a.init) {
            if (a.mode_index(e.mode) < 0)
                diags.push_back({a.name, "init", "unknown mode '" + e.mode + "'"});
            check_var_scope(e.condition, readable, a.name, "init " + e.mode, diags);
        }
    }

    for (const auto& [aname, mname] : goal.target_modes) {
        int ai = network.automaton_index(aname);
        if (ai < 0) {
            diags.push_back({"", "goal", "unknown automaton '" + aname + "'"});
        } else if (network.automata[ai].mode_index(mname) < 0) {
            diags.push_back({aname, "goal", "unknown mode '" + mname + "'"});
        }
    }
    check_var_scope(goal.predicate, all_names, "", "goal predicate", diags);

    return diags;
}

std::map<std::string, uint32_t> run_costs(const Automaton& automaton) {
    std::map<std::string, uint32_t> cost;
    for (const auto& m : automaton.modes) cost[m.name] = kInfiniteCost;
    std::deque<std::string> queue;
    for (const auto& e : automaton.init) {
        if (cost.count(e.mode) && cost[e.mode] == kInfiniteCost) {
            cost[e.mode] = 0;
            queue.push_back(e.mode);
        }
    }
    while (!queue.empty()) {
        std::string q = queue.front();
        queue.pop_front();
        for (const auto& j : automaton.jumps) {
            if (j.from != q || !cost.count(j.to)) continue;
            if (cost[j.to] == kInfiniteCost) {
                cost[j.to] = cost[q] + 1;
                queue.push_back(j.to);
            }
        }
    }
    return cost;
}

std::vector<const Jump*> enabled_jumps(const Automaton& automaton,
                                       const std::string& mode) {
    std::vector<const Jump*> out;
    for (const auto& j : automaton.jumps)
        if (j.from == mode) out.push_back(&j);
    return out;
}

}  // namespace hyra
