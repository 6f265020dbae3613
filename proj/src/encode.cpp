// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#include "hyra/encode.hpp"

#include <algorithm>
#include <sstream>

namespace hyra {

int ClauseDB::mode_var(int step, int autom, int mode) const {
    auto it = mode_index_.find({step, autom, mode});
    if (it == mode_index_.end())
        throw UnknownKeyError("no mode variable (step " + std::to_string(step) +
                              ", automaton " + std::to_string(autom) + ", mode " +
                              std::to_string(mode) + ")");
    return it->second;
}

int ClauseDB::sync_var(int trans, const std::string& label) const {
    auto it = sync_index_.find({trans, label});
    if (it == sync_index_.end())
        throw UnknownKeyError("no sync variable (transition " + std::to_string(trans) +
                              ", label '" + label + "')");
    return it->second;
}

int ClauseDB::num_var(const std::string& name) const {
    auto it = num_index_.find(name);
    if (it == num_index_.end())
        throw UnknownKeyError("no numeric variable '" + name + "'");
    return it->second;
}

int ClauseDB::start_id(int step, const std::string& base) const {
    return num_var(start_var_name(base, step));
}
int ClauseDB::end_id(int step, const std::string& base) const {
    return num_var(end_var_name(base, step));
}
int ClauseDB::delay_id(int step) const { return num_var(delay_var_name(step)); }

std::string ClauseDB::describe_bool_var(int v) const {
    const BoolVarInfo& info = bvars.at(static_cast<size_t>(v));
    std::ostringstream os;
    switch (info.kind) {
        case BoolKind::Mode:
            os << "mode[" << info.step << "][" << network->automata[info.autom].name
               << "=" << network->automata[info.autom].modes[info.mode].name << "]";
            break;
        case BoolKind::Sync:
            os << "sync[" << info.step << "][" << info.label << "]";
            break;
        case BoolKind::Aux:
            os << "aux[" << info.tag << "]";
            break;
    }
    return os.str();
}

namespace {

struct Builder {
    ClauseDB db;
    size_t var_cap;

    int new_bool(BoolVarInfo info) {
        if (db.bvars.size() >= var_cap)
            throw EncodingOverflowError("Boolean variable budget of " +
                                        std::to_string(var_cap) + " exhausted");
        db.bvars.push_back(std::move(info));
        db.attached.emplace_back();
        db.ode_attached.emplace_back();
        return static_cast<int>(db.bvars.size()) - 1;
    }

    void clause(std::vector<Lit> lits) { db.clauses.push_back(std::move(lits)); }

    // aux => each lit; plus group bookkeeping clauses below.
    void implications(int aux, const std::vector<Lit>& implied) {
        for (Lit l : implied) clause({make_lit(aux, false), l});
    }

    void exactly_one(const std::vector<int>& vars) {
        std::vector<Lit> alo;
        alo.reserve(vars.size());
        for (int v : vars) alo.push_back(make_lit(v, true));
        clause(std::move(alo));
        for (size_t a = 0; a < vars.size(); ++a)
            for (size_t b = a + 1; b < vars.size(); ++b)
                clause({make_lit(vars[a], false), make_lit(vars[b], false)});
    }
};

std::map<std::string, std::string> plain_to_start(const std::set<std::string>& vars,
                                                  int step) {
    std::map<std::string, std::string> m;
    for (const auto& v : vars) m[v] = start_var_name(v, step);
    return m;
}

std::map<std::string, std::string> plain_to_end(const std::set<std::string>& vars,
                                                int step) {
    std::map<std::string, std::string> m;
    for (const auto& v : vars) m[v] = end_var_name(v, step);
    return m;
}

FormulaPtr var_eq(const std::string& a, const std::string& b) {
    return atom(Constraint{var(a), Rel::Eq, var(b)});
}

}  // namespace

ClauseDB encode(const Network& network, const Goal& goal, int k, double max_delay,
                size_t var_cap) {
    Builder b;
    b.var_cap = var_cap;
    b.db.network = &network;
    b.db.goal = &goal;
    b.db.steps = k;
    b.db.max_delay = max_delay;
    ClauseDB& db = b.db;

    const auto all_vars = network.all_variables();
    std::set<std::string> all_var_names;
    for (const auto& [v, bounds] : all_vars) all_var_names.insert(v);

    // Union alphabet in first-declaration order across automata.
    std::set<std::string> seen_labels;
    for (const auto& a : network.automata)
        for (const auto& l : a.alphabet)
            if (seen_labels.insert(l).second) db.sync_labels.push_back(l);

    // Numeric variables: per step, all starts, all ends, then the delay.
    for (int i = 0; i <= k; ++i) {
        for (const auto& [v, bounds] : all_vars) {
            db.num_index_[start_var_name(v, i)] = static_cast<int>(db.nvars.size());
            db.nvars.push_back({NumRole::Start, i, v, start_var_name(v, i), bounds});
        }
        for (const auto& [v, bounds] : all_vars) {
            db.num_index_[end_var_name(v, i)] = static_cast<int>(db.nvars.size());
            db.nvars.push_back({NumRole::End, i, v, end_var_name(v, i), bounds});
        }
        db.num_index_[delay_var_name(i)] = static_cast<int>(db.nvars.size());
        db.nvars.push_back(
            {NumRole::Delay, i, "", delay_var_name(i), Interval(0.0, max_delay)});
        if (db.nvars.size() > var_cap)
            throw EncodingOverflowError("numeric variable budget of " +
                                        std::to_string(var_cap) + " exhausted");
    }

    // Mode variables first (lowest ids drive the solver's fixed decision
    // order), then sync variables, then aux variables as clauses are built.
    for (int i = 0; i <= k; ++i)
        for (size_t j = 0; j < network.automata.size(); ++j)
            for (size_t q = 0; q < network.automata[j].modes.size(); ++q) {
                int v = b.new_bool({BoolKind::Mode, i, static_cast<int>(j),
                                    static_cast<int>(q), "", ""});
                db.mode_index_[{i, static_cast<int>(j), static_cast<int>(q)}] = v;
            }
    for (int i = 0; i < k; ++i)
        for (const auto& l : db.sync_labels) {
            int v = b.new_bool({BoolKind::Sync, i, -1, -1, l, ""});
            db.sync_index_[{i, l}] = v;
        }

    // One occupied mode per automaton per step.
    for (int i = 0; i <= k; ++i)
        for (size_t j = 0; j < network.automata.size(); ++j) {
            std::vector<int> vars;
            for (size_t q = 0; q < network.automata[j].modes.size(); ++q)
                vars.push_back(db.mode_var(i, static_cast<int>(j), static_cast<int>(q)));
            b.exactly_one(vars);
        }

    // Flow + invariant obligations ride on the occupied-mode variables.
    for (int i = 0; i <= k; ++i)
        for (size_t j = 0; j < network.automata.size(); ++j) {
            const Automaton& a = network.automata[j];
            std::set<std::string> owned;
            for (const auto& [v, bounds] : a.variables) owned.insert(v);
            for (size_t q = 0; q < a.modes.size(); ++q) {
                const Mode& m = a.modes[q];
                int mv = db.mode_var(i, static_cast<int>(j), static_cast<int>(q));
                std::vector<FormulaPtr> parts;
                if (m.ode) {
                    db.ode_attached[mv].push_back(
                        {static_cast<int>(j), static_cast<int>(q), i});
                    std::set<std::string> flowing;
                    for (const auto& [v, d] : m.ode->derivatives) flowing.insert(v);
                    for (const auto& v : owned)
                        if (!flowing.count(v))
                            parts.push_back(
                                var_eq(end_var_name(v, i), start_var_name(v, i)));
                } else if (m.closed_form) {
                    std::map<std::string, std::string> rn;
                    rn["t"] = delay_var_name(i);
                    for (const auto& v : all_var_names) {
                        rn[v + "@0"] = start_var_name(v, i);
                        rn[v + "@t"] = end_var_name(v, i);
                    }
                    parts.push_back(rename_vars(m.closed_form->relation, rn));
                    std::set<std::string> mentioned;
                    for (const auto& fv : free_vars(m.closed_form->relation))
                        if (fv.size() > 2 && fv.substr(fv.size() - 2) == "@t")
                            mentioned.insert(fv.substr(0, fv.size() - 2));
                    for (const auto& v : owned)
                        if (!mentioned.count(v))
                            parts.push_back(
                                var_eq(end_var_name(v, i), start_var_name(v, i)));
                } else {
                    // No flow declared: the mode holds every owned variable.
                    for (const auto& v : owned)
                        parts.push_back(
                            var_eq(end_var_name(v, i), start_var_name(v, i)));
                }
                if (m.invariant->kind() != Formula::Kind::True) {
                    // Endpoint copies; ODE obligations additionally check the
                    // invariant on every enclosure slab in between.
                    parts.push_back(
                        rename_vars(m.invariant, plain_to_start(all_var_names, i)));
                    parts.push_back(
                        rename_vars(m.invariant, plain_to_end(all_var_names, i)));
                }
                if (!parts.empty()) db.attached[mv].push_back(conj(std::move(parts)));
            }
        }

    // Init alternatives (one group per automaton).
    for (size_t j = 0; j < network.automata.size(); ++j) {
        const Automaton& a = network.automata[j];
        AltGroup group{AltGroup::Kind::Init, static_cast<int>(j), -1, {}};
        for (size_t e = 0; e < a.init.size(); ++e) {
            const InitEntry& entry = a.init[e];
            int q = a.mode_index(entry.mode);
            int aux = b.new_bool({BoolKind::Aux, -1, static_cast<int>(j), -1, "",
                                  "init:" + a.name + ":" + entry.mode + "#" +
                                      std::to_string(e)});
            Alternative alt;
            alt.aux_var = aux;
            alt.implied = {make_lit(db.mode_var(0, static_cast<int>(j), q), true)};
            alt.constraint = rename_vars(entry.condition, plain_to_start(all_var_names, 0));
            alt.to_mode = q;
            b.implications(aux, alt.implied);
            if (alt.constraint->kind() != Formula::Kind::True)
                db.attached[aux].push_back(alt.constraint);
            group.alts.push_back(std::move(alt));
        }
        std::vector<int> auxes;
        for (const auto& alt : group.alts) auxes.push_back(alt.aux_var);
        b.exactly_one(auxes);
        db.groups.push_back(std::move(group));
    }

    // Transition alternatives: per automaton and transition, one jump
    // alternative per declared jump plus one noop alternative per mode.
    for (int i = 0; i < k; ++i)
        for (size_t j = 0; j < network.automata.size(); ++j) {
            const Automaton& a = network.automata[j];
            std::set<std::string> owned;
            for (const auto& [v, bounds] : a.variables) owned.insert(v);
            AltGroup group{AltGroup::Kind::Transition, static_cast<int>(j), i, {}};

            for (size_t ji = 0; ji < a.jumps.size(); ++ji) {
                const Jump& jump = a.jumps[ji];
                int qf = a.mode_index(jump.from);
                int qt = a.mode_index(jump.to);
                int aux = b.new_bool({BoolKind::Aux, i, static_cast<int>(j), -1, "",
                                      "trans:" + a.name + ":" + jump.from + "->" +
                                          jump.to + "@" + std::to_string(i) + "#" +
                                          std::to_string(ji)});
                Alternative alt;
                alt.aux_var = aux;
                alt.jump_index = static_cast<int>(ji);
                alt.from_mode = qf;
                alt.to_mode = qt;
                alt.implied = {
                    make_lit(db.mode_var(i, static_cast<int>(j), qf), true),
                    make_lit(db.mode_var(i + 1, static_cast<int>(j), qt), true)};
                for (const auto& l : a.alphabet)
                    alt.implied.push_back(
                        make_lit(db.sync_var(i, l), jump.labels.count(l) > 0));

                std::vector<FormulaPtr> parts;
                if (jump.guard->kind() != Formula::Kind::True)
                    parts.push_back(
                        rename_vars(jump.guard, plain_to_end(all_var_names, i)));
                std::map<std::string, std::string> upd;
                for (const auto& v : all_var_names) upd[v] = end_var_name(v, i);
                std::set<std::string> primed;
                for (const auto& fv : free_vars(jump.update))
                    if (!fv.empty() && fv.back() == '\'')
                        primed.insert(fv.substr(0, fv.size() - 1));
                for (const auto& v : primed)
                    upd[v + "'"] = start_var_name(v, i + 1);
                if (jump.update->kind() != Formula::Kind::True)
                    parts.push_back(rename_vars(jump.update, upd));
                for (const auto& v : owned)
                    if (!primed.count(v))
                        parts.push_back(
                            var_eq(start_var_name(v, i + 1), end_var_name(v, i)));
                alt.constraint = conj(std::move(parts));
                b.implications(aux, alt.implied);
                if (alt.constraint->kind() != Formula::Kind::True)
                    db.attached[aux].push_back(alt.constraint);
                group.alts.push_back(std::move(alt));
            }

            for (size_t q = 0; q < a.modes.size(); ++q) {
                int aux = b.new_bool({BoolKind::Aux, i, static_cast<int>(j), -1, "",
                                      "noop:" + a.name + ":" + a.modes[q].name + "@" +
                                          std::to_string(i)});
                Alternative alt;
                alt.aux_var = aux;
                alt.is_noop = true;
                alt.from_mode = static_cast<int>(q);
                alt.to_mode = static_cast<int>(q);
                alt.implied = {
                    make_lit(db.mode_var(i, static_cast<int>(j), static_cast<int>(q)),
                             true),
                    make_lit(
                        db.mode_var(i + 1, static_cast<int>(j), static_cast<int>(q)),
                        true)};
                for (const auto& l : a.alphabet)
                    alt.implied.push_back(make_lit(db.sync_var(i, l), false));
                std::vector<FormulaPtr> parts;
                for (const auto& v : owned)
                    parts.push_back(
                        var_eq(start_var_name(v, i + 1), end_var_name(v, i)));
                alt.constraint = conj(std::move(parts));
                b.implications(aux, alt.implied);
                if (alt.constraint->kind() != Formula::Kind::True)
                    db.attached[aux].push_back(alt.constraint);
                group.alts.push_back(std::move(alt));
            }

            std::vector<int> auxes;
            for (const auto& alt : group.alts) auxes.push_back(alt.aux_var);
            b.exactly_one(auxes);
            db.groups.push_back(std::move(group));
        }

    // Every transition fires at least one shared label.
    for (int i = 0; i < k; ++i) {
        std::vector<Lit> alo;
        for (const auto& l : db.sync_labels) alo.push_back(make_lit(db.sync_var(i, l), true));
        b.clause(std::move(alo));
    }

    // Goal: pin the target modes at step k and activate the predicate over
    // the final end-of-step valuation.
    for (const auto& [aname, mname] : goal.target_modes) {
        int aj = network.automaton_index(aname);
        int q = network.automata[aj].mode_index(mname);
        b.clause({make_lit(db.mode_var(k, aj, q), true)});
    }
    if (goal.predicate->kind() != Formula::Kind::True) {
        int aux = b.new_bool({BoolKind::Aux, k, -1, -1, "", "goal"});
        db.goal_aux = aux;
        db.attached[aux].push_back(
            rename_vars(goal.predicate, plain_to_end(all_var_names, k)));
        b.clause({make_lit(aux, true)});
    }

    return std::move(b.db);
}

std::string dump_encoding(const ClauseDB& db) {
    std::ostringstream os;
    os << "; unrolled encoding: k=" << db.steps << " max-delay=" << db.max_delay
       << "\n";
    for (const auto& nv : db.nvars)
        os << "(declare-real " << nv.name << " [" << nv.bounds.lo << ", "
           << nv.bounds.hi << "])\n";
    for (size_t v = 0; v < db.bvars.size(); ++v)
        os << "(declare-bool b" << v << ") ; " << db.describe_bool_var(static_cast<int>(v))
           << "\n";
    for (const auto& cl : db.clauses) {
        os << "(clause";
        for (Lit l : cl) os << " " << (lit_positive(l) ? "b" : "-b") << lit_var(l);
        os << ")\n";
    }
    for (size_t v = 0; v < db.bvars.size(); ++v) {
        for (const auto& f : db.attached[v])
            os << "(on b" << v << " " << to_sexpr(f) << ")\n";
        for (const auto& ob : db.ode_attached[v])
            os << "(on b" << v << " (flow-enclosure "
               << db.network->automata[ob.autom].name << " "
               << db.network->automata[ob.autom].modes[ob.mode].name << " step "
               << ob.step << "))\n";
    }
    return os.str();
}

}  // namespace hyra
