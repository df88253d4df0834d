// SPDX-License-Identifier: MIT
#include "prashna/engine.hpp"

#include <cctype>
#include <functional>
#include <optional>
#include <set>

#include "prashna/errors.hpp"

namespace prashna {

namespace {

Term V(const char* name) {
    Term t;
    t.kind = Term::Kind::variable;
    t.name = name;
    return t;
}

Term W() { return Term{}; }

Node L(const char* predicate, std::vector<Term> args) {
    Node n;
    n.kind = Node::Kind::lit;
    n.predicate = predicate;
    n.args = std::move(args);
    return n;
}

Node Or(Node a, Node b) {
    Node n;
    n.kind = Node::Kind::disj;
    n.children.push_back(std::move(a));
    n.children.push_back(std::move(b));
    return n;
}

Node And(Node a, Node b) {
    Node n;
    n.kind = Node::Kind::conj;
    n.children.push_back(std::move(a));
    n.children.push_back(std::move(b));
    return n;
}

bool value_equals_const(const Value& v, const std::variant<int64_t, std::string>& c) {
    if (const auto* n = std::get_if<int64_t>(&c))
        return std::holds_alternative<int64_t>(v) && std::get<int64_t>(v) == *n;
    return std::holds_alternative<std::string>(v) &&
           std::get<std::string>(v) == std::get<std::string>(c);
}

// nullptr: not an action predicate; empty set: any action qualifies
const std::set<std::string>* action_names(const std::string& pred) {
    static const std::map<std::string, std::set<std::string>> sets = {
        {"passes", {"XDP_PASS", "TC_ACT_OK"}},
        {"drops", {"XDP_DROP", "TC_ACT_SHOT"}},
        {"aborts", {"XDP_ABORTED"}},
        {"tx", {"XDP_TX"}},
        {"redirects", {"XDP_REDIRECT", "TC_ACT_REDIRECT"}},
        {"all", {}},
    };
    auto it = sets.find(pred);
    return it == sets.end() ? nullptr : &it->second;
}

std::string pretty_var(const std::string& name) {
    if (!name.empty() && name[0] == '$') {
        auto colon = name.find(':');
        if (colon != std::string::npos)
            return name.substr(colon + 1);
    }
    return name;
}

void named_vars(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::variable) {
        out.insert(t.name);
    } else if (t.kind == Term::Kind::pair_list) {
        for (const QPair& p : t.pairs) {
            named_vars(p.field, out);
            named_vars(p.value, out);
        }
    }
}

void named_vars(const Node& n, std::set<std::string>& out) {
    if (n.kind == Node::Kind::lit) {
        for (const Term& t : n.args)
            named_vars(t, out);
        return;
    }
    for (const Node& c : n.children)
        named_vars(c, out);
}

Term rewrite_term(const Term& t, const std::map<std::string, Term>& subst, const std::string& prefix) {
    if (t.kind == Term::Kind::variable) {
        auto it = subst.find(t.name);
        if (it != subst.end())
            return it->second;
        Term out = t;
        out.name = prefix + t.name;
        return out;
    }
    if (t.kind == Term::Kind::pair_list) {
        Term out = t;
        for (QPair& p : out.pairs) {
            p.field = rewrite_term(p.field, subst, prefix);
            p.value = rewrite_term(p.value, subst, prefix);
        }
        return out;
    }
    return t;
}

// Instantiates a rule body: parameters become the caller's argument terms,
// every other variable gets a fresh name so it cannot capture caller bindings.
Node rewrite_body(const Node& n, const std::map<std::string, Term>& subst, const std::string& prefix) {
    Node out = n;
    if (n.kind == Node::Kind::lit) {
        for (size_t i = 0; i < out.args.size(); ++i)
            out.args[i] = rewrite_term(n.args[i], subst, prefix);
        return out;
    }
    out.children.clear();
    for (const Node& c : n.children)
        out.children.push_back(rewrite_body(c, subst, prefix));
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct DepEdge {
    std::string from;
    std::string to;
    bool negated;
};

void collect_dep_edges(const std::string& head, const Node& n, bool under_neg, std::vector<DepEdge>& out) {
    if (n.kind == Node::Kind::lit) {
        out.push_back({head, n.predicate, under_neg});
        return;
    }
    bool neg = under_neg || n.kind == Node::Kind::neg;
    for (const Node& c : n.children)
        collect_dep_edges(head, c, neg, out);
}

} // namespace

// Per-call evaluation state: memo table of completed ground subgoals plus a
// counter for fresh variable renaming. The engine itself stays const.
class Solver {
  public:
    explicit Solver(const Engine& e) : e_(e) {}

    using Emit = std::function<bool(std::map<std::string, Value>&)>;
    using Env = std::map<std::string, Value>;

    bool eval(const Node& n, Env& env, size_t depth, const Emit& emit) {
        switch (n.kind) {
        case Node::Kind::lit:
            return eval_lit(n, env, depth, emit);
        case Node::Kind::conj:
            return eval_seq(n.children, 0, env, depth, emit);
        case Node::Kind::disj:
            for (const Node& c : n.children)
                if (eval(c, env, depth, emit))
                    return true;
            return false;
        case Node::Kind::neg: {
            std::set<std::string> vars;
            named_vars(n.children.front(), vars);
            for (const std::string& v : vars)
                if (!env.count(v))
                    fail(errc::unbound_negation,
                         "variable " + pretty_var(v) + " is unbound under negation");
            Env probe = env;
            bool found = false;
            eval(n.children.front(), probe, depth, [&](Env&) {
                found = true;
                return true;
            });
            return found ? false : emit(env);
        }
        }
        return false;
    }

  private:
    bool eval_seq(const std::vector<Node>& children, size_t i, Env& env, size_t depth, const Emit& emit) {
        if (i == children.size())
            return emit(env);
        return eval(children[i], env, depth, [&](Env& e) {
            return eval_seq(children, i + 1, e, depth, emit);
        });
    }

    bool eval_lit(const Node& n, Env& env, size_t depth, const Emit& emit) {
        if (fact_predicates().count(n.predicate))
            return eval_facts(n, env, emit);
        if (n.predicate == "correlatedMaps")
            return eval_correlated(n, env, emit);
        if (const std::set<std::string>* allowed = action_names(n.predicate))
            return eval_action(*allowed, n, env, emit);
        auto it = e_.rules_.find(n.predicate);
        if (it == e_.rules_.end())
            fail(errc::unknown_predicate, "'" + n.predicate + "'");

        std::optional<std::string> key = ground_key(n, env);
        if (key) {
            auto m = memo_.find(*key);
            if (m != memo_.end())
                return m->second ? emit(env) : false;
            bool found = false;
            Env probe = env;
            eval_rule(it->second, n, probe, depth, [&](Env&) {
                found = true;
                return true;
            });
            memo_.emplace(*key, found);
            return found ? emit(env) : false;
        }
        return eval_rule(it->second, n, env, depth, emit);
    }

    bool eval_rule(const RuleDef& rule, const Node& call, Env& env, size_t depth, const Emit& emit) {
        if (depth >= e_.depth_limit_)
            fail(errc::depth_exceeded, "recursion limit hit while solving " + rule.name);
        if (call.args.size() != rule.params.size())
            fail(errc::arity_error, rule.name);
        std::map<std::string, Term> subst;
        for (size_t i = 0; i < rule.params.size(); ++i)
            subst.emplace(rule.params[i], call.args[i]);
        Node body = rewrite_body(rule.body, subst, "$" + std::to_string(++fresh_) + ":");
        return eval(body, env, depth + 1, emit);
    }

    bool eval_facts(const Node& n, Env& env, const Emit& emit) {
        for (const auto& [line, fact] : e_.kb_.facts_for(n.predicate)) {
            (void)line;
            if (fact.args.size() != n.args.size())
                continue;
            if (match_args(n.args, fact.args, 0, env, emit))
                return true;
        }
        return false;
    }

    bool eval_action(const std::set<std::string>& allowed, const Node& n, Env& env, const Emit& emit) {
        for (const auto& [line, fact] : e_.kb_.facts_for("return_action")) {
            (void)line;
            if (fact.args.size() != 4)
                continue;
            const auto* action = std::get_if<std::string>(&fact.args[2]);
            if (!action || (!allowed.empty() && !allowed.count(*action)))
                continue;
            std::vector<Value> vs{fact.args[0], fact.args[1], fact.args[3]};
            if (match_args(n.args, vs, 0, env, emit))
                return true;
        }
        return false;
    }

    bool eval_correlated(const Node& n, Env& env, const Emit& emit) {
        return corr_pair(n.args[0], n.args[1].pairs, 0, env, emit);
    }

    // every listed (MapA, MapB) pair needs a witnessing correlated_maps fact
    bool corr_pair(const Term& nf, const std::vector<QPair>& ps, size_t i, Env& env, const Emit& emit) {
        if (i == ps.size())
            return emit(env);
        for (const auto& [line, fact] : e_.kb_.facts_for("correlated_maps")) {
            (void)line;
            if (fact.args.size() != 4)
                continue;
            std::vector<Term> ts{nf, ps[i].field, ps[i].value};
            std::vector<Value> vs{fact.args[0], fact.args[2], fact.args[3]};
            if (match_args(ts, vs, 0, env, [&](Env& e) { return corr_pair(nf, ps, i + 1, e, emit); }))
                return true;
        }
        return false;
    }

    bool match_args(const std::vector<Term>& ts, const std::vector<Value>& vs, size_t i, Env& env,
                    const Emit& cont) {
        if (i == ts.size())
            return cont(env);
        const Term& t = ts[i];
        const Value& v = vs[i];
        switch (t.kind) {
        case Term::Kind::constant:
            return value_equals_const(v, t.value) && match_args(ts, vs, i + 1, env, cont);
        case Term::Kind::wildcard:
            return match_args(ts, vs, i + 1, env, cont);
        case Term::Kind::neg_const:
            if (std::holds_alternative<PathCtxValue>(v) || !value_equals_const(v, t.value))
                return match_args(ts, vs, i + 1, env, cont);
            return false;
        case Term::Kind::variable: {
            auto it = env.find(t.name);
            if (it != env.end())
                return it->second == v && match_args(ts, vs, i + 1, env, cont);
            env.emplace(t.name, v);
            bool stop = match_args(ts, vs, i + 1, env, cont);
            env.erase(t.name);
            return stop;
        }
        case Term::Kind::pair_list: {
            const auto* ctx = std::get_if<PathCtxValue>(&v);
            if (!ctx)
                return false;
            return match_pairs(t.pairs, 0, *ctx, env,
                               [&](Env& e) { return match_args(ts, vs, i + 1, e, cont); });
        }
        }
        return false;
    }

    // A pair list filters a path context: a (var, var) or (*, *) pair is
    // vacuous, a constant value needs a non-negated recorded pair, !const is
    // satisfied by a differing recorded value (or a negated equal one), and
    // variables bind from non-negated pairs only.
    bool match_pairs(const std::vector<QPair>& ps, size_t i, const PathCtxValue& ctx, Env& env,
                     const Emit& cont) {
        if (i == ps.size())
            return cont(env);
        const QPair& p = ps[i];
        if (p.field.kind == Term::Kind::wildcard && p.value.kind == Term::Kind::wildcard)
            return match_pairs(ps, i + 1, ctx, env, cont);
        for (const PathPair& pp : ctx.pairs) {
            bool bound_field = false;
            if (p.field.kind == Term::Kind::constant) {
                if (!(std::holds_alternative<std::string>(p.field.value) &&
                      std::get<std::string>(p.field.value) == pp.field))
                    continue;
            } else if (p.field.kind == Term::Kind::variable) {
                auto it = env.find(p.field.name);
                if (it != env.end()) {
                    if (!(std::holds_alternative<std::string>(it->second) &&
                          std::get<std::string>(it->second) == pp.field))
                        continue;
                } else {
                    env.emplace(p.field.name, Value(pp.field));
                    bound_field = true;
                }
            }
            bool ok = false;
            bool bound_value = false;
            switch (p.value.kind) {
            case Term::Kind::constant:
                ok = !pp.negated && std::holds_alternative<int64_t>(p.value.value) &&
                     std::get<int64_t>(p.value.value) == pp.value;
                break;
            case Term::Kind::neg_const: {
                bool eq = std::holds_alternative<int64_t>(p.value.value) &&
                          std::get<int64_t>(p.value.value) == pp.value;
                ok = pp.negated ? eq : !eq;
                break;
            }
            case Term::Kind::wildcard:
                ok = true;
                break;
            case Term::Kind::variable: {
                auto it = env.find(p.value.name);
                if (it != env.end()) {
                    ok = !pp.negated && it->second == Value(pp.value);
                } else if (!pp.negated) {
                    env.emplace(p.value.name, Value(pp.value));
                    bound_value = true;
                    ok = true;
                }
                break;
            }
            default:
                break;
            }
            bool stop = ok && match_pairs(ps, i + 1, ctx, env, cont);
            if (bound_value)
                env.erase(p.value.name);
            if (bound_field)
                env.erase(p.field.name);
            if (stop)
                return true;
        }
        return false;
    }

    std::optional<std::string> ground_key(const Node& n, const Env& env) const {
        std::string key = n.predicate + "(";
        for (size_t i = 0; i < n.args.size(); ++i) {
            std::optional<std::string> part = ground_term_key(n.args[i], env);
            if (!part)
                return std::nullopt;
            if (i)
                key += ",";
            key += *part;
        }
        return key + ")";
    }

    std::optional<std::string> ground_term_key(const Term& t, const Env& env) const {
        switch (t.kind) {
        case Term::Kind::constant:
            if (const auto* n = std::get_if<int64_t>(&t.value))
                return serialize_value(Value(*n));
            return serialize_value(Value(std::get<std::string>(t.value)));
        case Term::Kind::wildcard:
            return "*";
        case Term::Kind::neg_const:
            if (const auto* n = std::get_if<int64_t>(&t.value))
                return "!" + serialize_value(Value(*n));
            return "!" + serialize_value(Value(std::get<std::string>(t.value)));
        case Term::Kind::variable: {
            auto it = env.find(t.name);
            if (it == env.end())
                return std::nullopt;
            return "=" + serialize_value(it->second);
        }
        case Term::Kind::pair_list: {
            std::string out = "[";
            for (size_t i = 0; i < t.pairs.size(); ++i) {
                std::optional<std::string> f = ground_term_key(t.pairs[i].field, env);
                std::optional<std::string> v = ground_term_key(t.pairs[i].value, env);
                if (!f || !v)
                    return std::nullopt;
                if (i)
                    out += ",";
                out += "(" + *f + "," + *v + ")";
            }
            return out + "]";
        }
        }
        return std::nullopt;
    }

    const Engine& e_;
    std::map<std::string, bool> memo_;
    size_t fresh_ = 0;
};

namespace {

std::string render_value(const Value& v) {
    if (const auto* n = std::get_if<int64_t>(&v))
        return std::to_string(*n);
    if (const auto* s = std::get_if<std::string>(&v))
        return *s;
    return serialize_value(v);
}

void validate_rule_body(const RuleDef& rule, const PredicateTable& table, const Node& n) {
    if (n.kind != Node::Kind::lit) {
        for (const Node& c : n.children)
            validate_rule_body(rule, table, c);
        return;
    }
    PredicateSig sig;
    if (n.predicate == rule.name) {
        sig = PredicateSig{static_cast<int>(rule.params.size()), -1};
    } else {
        auto it = table.find(n.predicate);
        if (it == table.end())
            fail(errc::unknown_predicate, "'" + n.predicate + "' in body of rule " + rule.name);
        sig = it->second;
    }
    if (static_cast<int>(n.args.size()) != sig.arity)
        fail(errc::arity_error, n.predicate + " expects " + std::to_string(sig.arity) +
                                    " arguments in body of rule " + rule.name);
    for (int i = 0; i < static_cast<int>(n.args.size()); ++i) {
        bool is_list = n.args[static_cast<size_t>(i)].kind == Term::Kind::pair_list;
        if (i == sig.pair_arg) {
            bool ok = is_list || n.args[static_cast<size_t>(i)].kind == Term::Kind::variable ||
                      n.args[static_cast<size_t>(i)].kind == Term::Kind::wildcard;
            if (n.predicate == "correlatedMaps")
                ok = is_list;
            if (!ok)
                fail(errc::arity_error, "argument " + std::to_string(i + 1) + " of " + n.predicate +
                                            " must be a pair list (rule " + rule.name + ")");
        } else if (is_list) {
            fail(errc::arity_error, "argument " + std::to_string(i + 1) + " of " + n.predicate +
                                        " cannot be a pair list (rule " + rule.name + ")");
        }
    }
}

} // namespace

Engine::Engine(KnowledgeBase kb) : kb_(std::move(kb)) {
    for (const auto& [name, arity] : fact_predicates())
        predicates_[name] = PredicateSig{arity, name == "return_action" ? 3 : -1};
    for (const auto& [name, sig] : builtin_query_predicates())
        predicates_[name] = sig;

    auto def = [&](const char* name, std::vector<std::string> params, Node body) {
        rules_[name] = RuleDef{name, std::move(params), std::move(body)};
        builtin_names_[name] = false;
    };
    def("readsField", {"Nf", "Fld"},
        Or(L("read_header_field", {V("Nf"), W(), V("Fld")}),
           L("read_buffer_field", {V("Nf"), W(), V("Fld")})));
    def("updatesField", {"Nf", "Fld"},
        Or(L("write_header_field", {V("Nf"), W(), V("Fld")}),
           L("write_buffer_field", {V("Nf"), W(), V("Fld")})));
    def("mapLookup", {"Nf", "Map"}, L("read_from_map", {V("Nf"), W(), V("Map")}));
    def("mapWrite", {"Nf", "Map", "Fld"}, L("write_into_map", {V("Nf"), W(), V("Map"), V("Fld")}));
    // the field argument is unconstrained: the fact schema records protocols,
    // not the selector field that reached them
    def("accessesProtocol", {"Nf", "Fld", "Proto"}, L("protocol_accessed", {V("Nf"), W(), V("Proto")}));
    def("callsHelper", {"Nf", "Helper"}, L("invoke_helper", {V("Nf"), W(), V("Helper")}));
    def("successorNF", {"Nf", "SNf"},
        Or(L("nf_edge", {V("Nf"), V("SNf")}),
           And(L("nf_edge", {V("Nf"), V("Int")}), L("successorNF", {V("Int"), V("SNf")}))));
    def("predecessorNF", {"Nf", "PNf"},
        Or(L("nf_edge", {V("PNf"), V("Nf")}),
           And(L("nf_edge", {V("Int"), V("Nf")}), L("predecessorNF", {V("Int"), V("PNf")}))));
    for (const char* name : {"passes", "drops", "aborts", "tx", "redirects", "all", "correlatedMaps"})
        builtin_names_[name] = true;
}

void Engine::register_rule(const RuleDef& rule) {
    if (rule.name.empty() || !std::islower(static_cast<unsigned char>(rule.name[0])))
        fail(errc::syntax_error, "rule names start with a lowercase letter");
    if (predicates_.count(rule.name))
        fail(errc::shadows_builtin, "'" + rule.name + "' is already defined");
    if (rule.params.empty())
        fail(errc::syntax_error, "rules need at least one parameter");
    std::set<std::string> seen;
    for (const std::string& p : rule.params) {
        if (p.empty() || !std::isupper(static_cast<unsigned char>(p[0])))
            fail(errc::syntax_error, "rule parameters must be variables, got '" + p + "'");
        if (!seen.insert(p).second)
            fail(errc::syntax_error, "duplicate rule parameter " + p);
    }
    validate_rule_body(rule, predicates_, rule.body);

    // stratified negation: no negated dependency may sit on a recursion cycle
    std::vector<DepEdge> edges;
    for (const auto& [name, def] : rules_)
        collect_dep_edges(name, def.body, false, edges);
    collect_dep_edges(rule.name, rule.body, false, edges);
    std::set<std::string> heads;
    for (const auto& [name, def] : rules_)
        heads.insert(name);
    heads.insert(rule.name);
    for (const DepEdge& neg : edges) {
        if (!neg.negated || !heads.count(neg.to))
            continue;
        // can neg.to reach neg.from back through rule heads?
        std::set<std::string> visited;
        std::vector<std::string> work{neg.to};
        bool cyclic = false;
        while (!work.empty() && !cyclic) {
            std::string cur = work.back();
            work.pop_back();
            if (cur == neg.from)
                cyclic = true;
            else if (visited.insert(cur).second)
                for (const DepEdge& e : edges)
                    if (e.from == cur && heads.count(e.to))
                        work.push_back(e.to);
        }
        if (cyclic)
            fail(errc::unstratified_negation,
                 "rule " + neg.from + " negates " + neg.to + " inside a recursive cycle");
    }

    predicates_[rule.name] = PredicateSig{static_cast<int>(rule.params.size()), -1};
    rules_[rule.name] = rule;
}

SolveResult Engine::solve(const Query& query) const {
    Solver solver(*this);
    SolveResult out;
    out.retrieval = query.retrieval;
    out.variables = query.variables;
    Solver::Env env;
    if (!query.retrieval) {
        bool found = false;
        solver.eval(query.root, env, 0, [&](Solver::Env&) {
            found = true;
            return true;
        });
        out.truth = found;
        return out;
    }
    std::set<std::vector<std::string>> rows;
    solver.eval(query.root, env, 0, [&](Solver::Env& e) {
        std::vector<std::string> row;
        row.reserve(query.variables.size());
        for (const std::string& v : query.variables) {
            auto it = e.find(v);
            row.push_back(it == e.end() ? "_" : render_value(it->second));
        }
        rows.insert(std::move(row));
        return false;
    });
    out.truth = !rows.empty();
    out.rows.assign(rows.begin(), rows.end());
    return out;
}

SolveResult Engine::solve(const std::string& text) const {
    return solve(parse_query(text, predicates_));
}

RuleDef parse_rule(const std::string& text, const Engine& engine) {
    size_t sep = text.find(":-");
    if (sep == std::string::npos)
        fail(errc::syntax_error, "expected ':-' between rule head and body");
    std::string head = trim(text.substr(0, sep));
    std::string body = trim(text.substr(sep + 2));
    size_t lp = head.find('(');
    if (lp == std::string::npos || head.back() != ')')
        fail(errc::syntax_error, "rule head must look like name(Param, ...)");
    RuleDef rule;
    rule.name = trim(head.substr(0, lp));
    std::string inner = head.substr(lp + 1, head.size() - lp - 2);
    std::string cur;
    for (char c : inner + ",") {
        if (c == ',') {
            std::string p = trim(cur);
            if (p.empty())
                fail(errc::syntax_error, "empty rule parameter");
            rule.params.push_back(p);
            cur.clear();
        } else {
            cur += c;
        }
    }
    PredicateTable table = engine.predicates();
    table[rule.name] = PredicateSig{static_cast<int>(rule.params.size()), -1};
    rule.body = parse_query(body, table).root;
    return rule;
}

} // namespace prashna
