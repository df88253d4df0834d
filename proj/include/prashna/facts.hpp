// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "prashna/analyzer.hpp"

namespace prashna {

// Path context argument of return_action: the (field, value) outcomes the
// path is conditioned on plus the block ids it traverses.
struct PathCtxValue {
    std::vector<PathPair> pairs;
    std::vector<std::string> blocks;

    auto operator<=>(const PathCtxValue&) const = default;
};

using Value = std::variant<int64_t, std::string, PathCtxValue>;

struct Fact {
    std::string predicate;
    std::vector<Value> args;

    bool operator==(const Fact&) const = default;
};

// name -> arity of every fact predicate a knowledge base may hold
const std::map<std::string, int>& fact_predicates();

std::string serialize_value(const Value& value);
std::string serialize_fact(const Fact& fact); // canonical one-line form, '.'-terminated

std::vector<Fact> emit_facts(const CfgNc& result, const std::string& nf_id);

// nf_edge facts for a priority-ordered chain. Throws DuplicateNfId.
std::vector<Fact> emit_chain_facts(const std::vector<std::string>& nf_ids);

class KnowledgeBase {
  public:
    void add(Fact fact);
    void add_all(std::vector<Fact> facts);

    size_t size() const;
    // facts of one predicate, keyed (and ordered) by canonical line
    const std::map<std::string, Fact>& facts_for(const std::string& predicate) const;
    const std::map<std::string, std::map<std::string, Fact>>& by_predicate() const {
        return facts_;
    }

  private:
    std::map<std::string, std::map<std::string, Fact>> facts_;
};

// One canonical line per fact, lexicographically sorted and deduplicated.
std::string serialize_kb(const KnowledgeBase& kb);

KnowledgeBase parse_kb(const std::string& text);

} // namespace prashna
