// SPDX-License-Identifier: MIT
#include "prashna/facts.hpp"

#include <cctype>
#include <sstream>

#include "prashna/errors.hpp"

namespace prashna {

const std::map<std::string, int>& fact_predicates() {
    static const std::map<std::string, int> table = {
        {"read_header_field", 3}, {"read_buffer_field", 3}, {"write_header_field", 3},
        {"write_buffer_field", 3}, {"read_from_map", 3},    {"write_into_map", 4},
        {"correlated_maps", 4},    {"invoke_helper", 3},    {"protocol_accessed", 3},
        {"return_action", 4},      {"edge", 2},             {"nf_edge", 2},
    };
    return table;
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string serialize_ctx(const PathCtxValue& ctx) {
    std::string out = "[[";
    bool first = true;
    for (const PathPair& p : ctx.pairs) {
        if (!first)
            out.push_back(',');
        first = false;
        out += "(" + quote(p.field) + ",";
        if (p.negated)
            out.push_back('!');
        out += std::to_string(p.value) + ")";
    }
    out += "],[";
    first = true;
    for (const std::string& b : ctx.blocks) {
        if (!first)
            out.push_back(',');
        first = false;
        out += quote(b);
    }
    out += "]]";
    return out;
}

ContextItem::Kind kind_of(const ContextItem& item) { return item.kind; }

const char* fact_name(ContextItem::Kind kind) {
    switch (kind) {
    case ContextItem::Kind::read_buffer_field: return "read_buffer_field";
    case ContextItem::Kind::read_header_field: return "read_header_field";
    case ContextItem::Kind::write_buffer_field: return "write_buffer_field";
    case ContextItem::Kind::write_header_field: return "write_header_field";
    case ContextItem::Kind::read_from_map: return "read_from_map";
    case ContextItem::Kind::write_into_map: return "write_into_map";
    case ContextItem::Kind::correlated_maps: return "correlated_maps";
    case ContextItem::Kind::invoke_helper: return "invoke_helper";
    case ContextItem::Kind::protocol_accessed: return "protocol_accessed";
    }
    return "unknown";
}

// --- knowledge base text parsing ---

class KbParser {
  public:
    KbParser(const std::string& line, size_t lineno) : s_(line), lineno_(lineno) {}

    Fact parse() {
        Fact fact;
        fact.predicate = ident();
        expect('(');
        fact.args.push_back(value());
        while (eat(','))
            fact.args.push_back(value());
        expect(')');
        expect('.');
        skip_ws();
        if (pos_ != s_.size())
            err("trailing characters");
        return fact;
    }

  private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t'))
            ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c))
            err(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        if (start == pos_)
            err("expected identifier");
        return s_.substr(start, pos_ - start);
    }
    int64_t integer() {
        skip_ws();
        size_t start = pos_;
        if (pos_ < s_.size() && s_[pos_] == '-')
            ++pos_;
        size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (digits == pos_)
            err("expected integer");
        return std::stoll(s_.substr(start, pos_ - start));
    }
    std::string string_lit() {
        expect('"');
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\' && pos_ < s_.size()) {
                char e = s_[pos_++];
                if (e == 'n')
                    out.push_back('\n');
                else
                    out.push_back(e);
            } else {
                out.push_back(c);
            }
        }
        if (pos_ >= s_.size())
            err("unterminated string");
        ++pos_;
        return out;
    }
    Value value() {
        skip_ws();
        if (pos_ >= s_.size())
            err("expected value");
        char c = s_[pos_];
        if (c == '"')
            return Value{string_lit()};
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c)))
            return Value{integer()};
        if (c == '[')
            return Value{ctx_value()};
        err("expected value");
    }
    PathCtxValue ctx_value() {
        PathCtxValue ctx;
        expect('[');
        expect('[');
        if (!eat(']')) {
            do {
                expect('(');
                PathPair p;
                p.field = string_lit();
                expect(',');
                skip_ws();
                if (eat('!'))
                    p.negated = true;
                p.value = integer();
                expect(')');
                ctx.pairs.push_back(std::move(p));
            } while (eat(','));
            expect(']');
        }
        expect(',');
        expect('[');
        if (!eat(']')) {
            do {
                ctx.blocks.push_back(string_lit());
            } while (eat(','));
            expect(']');
        }
        expect(']');
        return ctx;
    }
    [[noreturn]] void err(const std::string& what) {
        fail(errc::kb_parse_error, "line " + std::to_string(lineno_) + ": " + what);
    }

    const std::string& s_;
    size_t lineno_;
    size_t pos_ = 0;
};

void validate_fact(const Fact& fact, size_t lineno) {
    auto it = fact_predicates().find(fact.predicate);
    if (it == fact_predicates().end())
        fail(errc::kb_parse_error,
             "line " + std::to_string(lineno) + ": unknown predicate '" + fact.predicate + "'");
    if (static_cast<int>(fact.args.size()) != it->second)
        fail(errc::kb_parse_error, "line " + std::to_string(lineno) + ": " + fact.predicate +
                                       " expects " + std::to_string(it->second) + " arguments");
    for (size_t i = 0; i < fact.args.size(); ++i) {
        bool want_ctx = fact.predicate == "return_action" && i == 3;
        bool is_ctx = std::holds_alternative<PathCtxValue>(fact.args[i]);
        if (want_ctx != is_ctx)
            fail(errc::kb_parse_error, "line " + std::to_string(lineno) + ": argument " +
                                           std::to_string(i + 1) + " of " + fact.predicate +
                                           " has the wrong shape");
    }
}

} // namespace

std::string serialize_value(const Value& value) {
    if (const auto* i = std::get_if<int64_t>(&value))
        return std::to_string(*i);
    if (const auto* s = std::get_if<std::string>(&value))
        return quote(*s);
    return serialize_ctx(std::get<PathCtxValue>(value));
}

std::string serialize_fact(const Fact& fact) {
    std::string out = fact.predicate + "(";
    for (size_t i = 0; i < fact.args.size(); ++i) {
        if (i)
            out.push_back(',');
        out += serialize_value(fact.args[i]);
    }
    out += ").";
    return out;
}

std::vector<Fact> emit_facts(const CfgNc& result, const std::string& nf_id) {
    std::vector<Fact> facts;
    for (const BasicBlock& block : result.cfg.blocks) {
        auto it = result.block_ctx.find(block.id);
        if (it == result.block_ctx.end())
            continue;
        for (const ContextItem& item : it->second) {
            Fact f;
            f.predicate = fact_name(kind_of(item));
            f.args = {Value{nf_id}, Value{block.id}, Value{item.a}};
            if (!item.b.empty())
                f.args.push_back(Value{item.b});
            facts.push_back(std::move(f));
        }
        for (const std::string& succ : block.successors)
            facts.push_back(Fact{"edge", {Value{block.id}, Value{succ}}});
    }
    for (const PathAction& pa : result.path_actions) {
        PathCtxValue ctx{pa.pairs, pa.blocks};
        facts.push_back(Fact{"return_action",
                             {Value{nf_id}, Value{pa.hook}, Value{pa.action}, Value{std::move(ctx)}}});
    }
    return facts;
}

std::vector<Fact> emit_chain_facts(const std::vector<std::string>& nf_ids) {
    for (size_t i = 0; i < nf_ids.size(); ++i)
        for (size_t j = i + 1; j < nf_ids.size(); ++j)
            if (nf_ids[i] == nf_ids[j])
                fail(errc::duplicate_nf_id, "'" + nf_ids[i] + "' appears twice in the chain");
    std::vector<Fact> facts;
    for (size_t i = 0; i + 1 < nf_ids.size(); ++i)
        facts.push_back(Fact{"nf_edge", {Value{nf_ids[i]}, Value{nf_ids[i + 1]}}});
    return facts;
}

void KnowledgeBase::add(Fact fact) {
    std::string line = serialize_fact(fact);
    facts_[fact.predicate].emplace(std::move(line), std::move(fact));
}

void KnowledgeBase::add_all(std::vector<Fact> facts) {
    for (Fact& f : facts)
        add(std::move(f));
}

size_t KnowledgeBase::size() const {
    size_t n = 0;
    for (const auto& [pred, group] : facts_)
        n += group.size();
    return n;
}

const std::map<std::string, Fact>& KnowledgeBase::facts_for(const std::string& predicate) const {
    static const std::map<std::string, Fact> empty;
    auto it = facts_.find(predicate);
    return it == facts_.end() ? empty : it->second;
}

std::string serialize_kb(const KnowledgeBase& kb) {
    // per-predicate groups concatenate in canonical order because no
    // predicate name is a prefix of another
    std::string out;
    for (const auto& [pred, group] : kb.by_predicate())
        for (const auto& [line, fact] : group) {
            out += line;
            out.push_back('\n');
        }
    return out;
}

KnowledgeBase parse_kb(const std::string& text) {
    KnowledgeBase kb;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        Fact fact = KbParser(line, lineno).parse();
        validate_fact(fact, lineno);
        kb.add(std::move(fact));
    }
    return kb;
}

} // namespace prashna
