// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "prashna/facts.hpp"
#include "prashna/querylang.hpp"

namespace prashna {

struct RuleDef {
    std::string name;
    std::vector<std::string> params;
    Node body;
};

struct SolveResult {
    bool retrieval = false;
    bool truth = false;
    std::vector<std::string> variables;
    std::vector<std::vector<std::string>> rows;
};

// Evaluates queries against a knowledge base: built-in rules over the fact
// schema, user-registered rules, negation as failure, recursion with a depth
// guard. Solving never mutates the engine, so concurrent solve calls are safe.
class Engine {
  public:
    explicit Engine(KnowledgeBase kb);

    const KnowledgeBase& kb() const { return kb_; }

    // Predicate table for parsing queries against this engine: query
    // built-ins, raw fact predicates and registered rules.
    const PredicateTable& predicates() const { return predicates_; }

    void register_rule(const RuleDef& rule);

    SolveResult solve(const Query& query) const;
    SolveResult solve(const std::string& text) const;

    size_t depth_limit() const { return depth_limit_; }
    void set_depth_limit(size_t limit) { depth_limit_ = limit; }

  private:
    KnowledgeBase kb_;
    std::map<std::string, RuleDef> rules_;      // built-in and user rules
    std::map<std::string, bool> builtin_names_; // true: native, false: rule
    PredicateTable predicates_;
    size_t depth_limit_ = 1024;

    friend class Solver;
};

// Parses "head(P1, P2) :- body." into a RuleDef using the engine's current
// predicate table (the head predicate itself is allowed, for recursion).
RuleDef parse_rule(const std::string& text, const Engine& engine);

} // namespace prashna
