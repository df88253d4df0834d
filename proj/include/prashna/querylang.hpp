// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace prashna {

struct QPair;

// One argument position of a literal.
struct Term {
    enum class Kind {
        constant,  // atom, quoted string or integer
        variable,  // named, starts with an uppercase letter
        wildcard,  // '*', '_', '_foo' or the keyword 'var'
        neg_const, // '!' before a constant: any value except this one
        pair_list, // '[(fld, val), ...]'
    };
    Kind kind = Kind::wildcard;
    std::variant<int64_t, std::string> value; // constant / neg_const payload
    std::string name;                         // variable name
    std::vector<QPair> pairs;                 // pair_list content
};

struct QPair {
    Term field;
    Term value;
};

struct Node {
    enum class Kind { lit, conj, disj, neg };
    Kind kind = Kind::lit;
    std::string predicate;      // lit
    std::vector<Term> args;     // lit
    std::vector<Node> children; // conj/disj: 2+, neg: exactly 1
};

struct PredicateSig {
    int arity = 0;
    int pair_arg = -1; // argument index that must be a pair list, if any
};

using PredicateTable = std::map<std::string, PredicateSig>;

// The query-level predicates every engine understands.
const PredicateTable& builtin_query_predicates();

struct Query {
    Node root;
    bool retrieval = false;             // true when any named variable occurs
    std::vector<std::string> variables; // named variables in first-occurrence order
};

// Parses one '.'-terminated query. Throws SyntaxError, UnknownPredicate or
// ArityError.
Query parse_query(const std::string& text);
Query parse_query(const std::string& text, const PredicateTable& predicates);

std::string to_string(const Term& term);
std::string to_string(const Node& node);
std::string to_string(const Query& query);

} // namespace prashna
