// SPDX-License-Identifier: MIT
#include "prashna/querylang.hpp"

#include <cctype>

#include "prashna/errors.hpp"

namespace prashna {

const PredicateTable& builtin_query_predicates() {
    static const PredicateTable table = {
        {"readsField", {2, -1}},    {"updatesField", {2, -1}},  {"mapLookup", {2, -1}},
        {"mapWrite", {3, -1}},      {"accessesProtocol", {3, -1}}, {"callsHelper", {2, -1}},
        {"successorNF", {2, -1}},   {"predecessorNF", {2, -1}}, {"correlatedMaps", {2, 1}},
        {"passes", {3, 2}},         {"drops", {3, 2}},          {"aborts", {3, 2}},
        {"tx", {3, 2}},             {"redirects", {3, 2}},      {"all", {3, 2}},
    };
    return table;
}

namespace {

enum class Tok { ident, integer, string, lparen, rparen, lbrack, rbrack, comma, semi, bang, star, dot, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    int64_t number = 0;
    size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void err(const std::string& what, size_t pos) {
        fail(errc::syntax_error, "column " + std::to_string(pos + 1) + ": " + what);
    }

  private:
    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@';
    }

    void advance() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
        tok_ = Token{};
        tok_.pos = pos_;
        if (pos_ >= s_.size()) {
            tok_.kind = Tok::end;
            return;
        }
        char c = s_[pos_];
        if (ident_start(c)) {
            size_t start = pos_;
            while (pos_ < s_.size() && ident_char(s_[pos_]))
                ++pos_;
            // dots join identifier segments when flanked by identifier chars
            while (pos_ + 1 < s_.size() && s_[pos_] == '.' && ident_char(s_[pos_ + 1])) {
                ++pos_;
                while (pos_ < s_.size() && ident_char(s_[pos_]))
                    ++pos_;
            }
            tok_.kind = Tok::ident;
            tok_.text = s_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
            size_t start = pos_;
            if (c == '-')
                ++pos_;
            int base = 10;
            if (pos_ + 1 < s_.size() && s_[pos_] == '0' && (s_[pos_ + 1] == 'x' || s_[pos_ + 1] == 'X')) {
                base = 16;
                pos_ += 2;
            }
            while (pos_ < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                    (base == 16 && std::isxdigit(static_cast<unsigned char>(s_[pos_])))))
                ++pos_;
            // digits followed by '.' and more digits form a dotted atom (addresses)
            if (base == 10 && pos_ + 1 < s_.size() && s_[pos_] == '.' &&
                std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
                while (pos_ < s_.size() &&
                       (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                        (s_[pos_] == '.' && pos_ + 1 < s_.size() &&
                         std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))))
                    ++pos_;
                tok_.kind = Tok::ident;
                tok_.text = s_.substr(start, pos_ - start);
                return;
            }
            tok_.kind = Tok::integer;
            std::string digits = s_.substr(start, pos_ - start);
            try {
                tok_.number = std::stoll(digits, nullptr, 0);
            } catch (const std::exception&) {
                err("bad integer '" + digits + "'", start);
            }
            return;
        }
        if (c == '"') {
            ++pos_;
            std::string out;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                char d = s_[pos_++];
                if (d == '\\' && pos_ < s_.size()) {
                    char e = s_[pos_++];
                    out.push_back(e == 'n' ? '\n' : e);
                } else {
                    out.push_back(d);
                }
            }
            if (pos_ >= s_.size())
                err("unterminated string", tok_.pos);
            ++pos_;
            tok_.kind = Tok::string;
            tok_.text = out;
            return;
        }
        ++pos_;
        switch (c) {
        case '(': tok_.kind = Tok::lparen; return;
        case ')': tok_.kind = Tok::rparen; return;
        case '[': tok_.kind = Tok::lbrack; return;
        case ']': tok_.kind = Tok::rbrack; return;
        case ',': tok_.kind = Tok::comma; return;
        case ';': tok_.kind = Tok::semi; return;
        case '!': tok_.kind = Tok::bang; return;
        case '*': tok_.kind = Tok::star; return;
        case '.': tok_.kind = Tok::dot; return;
        default: err(std::string("unexpected character '") + c + "'", tok_.pos);
        }
    }

    const std::string& s_;
    size_t pos_ = 0;
    Token tok_;
};

bool is_wildcard_word(const std::string& w) { return w == "var" || w == "_" || w[0] == '_'; }

bool is_variable_word(const std::string& w) {
    if (w.find('.') != std::string::npos)
        return false;
    return std::isupper(static_cast<unsigned char>(w[0])) != 0;
}

class Parser {
  public:
    Parser(const std::string& text, const PredicateTable& predicates)
        : lex_(text), predicates_(predicates) {}

    Query parse() {
        Query q;
        q.root = disjunction();
        if (lex_.peek().kind != Tok::dot)
            lex_.err("expected '.' to end the query", lex_.peek().pos);
        lex_.take();
        if (lex_.peek().kind != Tok::end)
            lex_.err("trailing input after '.'", lex_.peek().pos);
        collect_variables(q.root, q.variables);
        q.retrieval = !q.variables.empty();
        return q;
    }

  private:
    Node disjunction() {
        Node first = conjunction();
        if (lex_.peek().kind != Tok::semi)
            return first;
        Node out;
        out.kind = Node::Kind::disj;
        out.children.push_back(std::move(first));
        while (lex_.peek().kind == Tok::semi) {
            lex_.take();
            out.children.push_back(conjunction());
        }
        return out;
    }

    Node conjunction() {
        Node first = unary();
        if (lex_.peek().kind != Tok::comma)
            return first;
        Node out;
        out.kind = Node::Kind::conj;
        out.children.push_back(std::move(first));
        while (lex_.peek().kind == Tok::comma) {
            lex_.take();
            out.children.push_back(unary());
        }
        return out;
    }

    Node unary() {
        if (lex_.peek().kind == Tok::bang) {
            lex_.take();
            Node out;
            out.kind = Node::Kind::neg;
            out.children.push_back(unary());
            return out;
        }
        if (lex_.peek().kind == Tok::lparen) {
            lex_.take();
            Node inner = disjunction();
            if (lex_.peek().kind != Tok::rparen)
                lex_.err("expected ')'", lex_.peek().pos);
            lex_.take();
            return inner;
        }
        return literal();
    }

    Node literal() {
        Token name = lex_.take();
        if (name.kind != Tok::ident)
            lex_.err("expected a predicate", name.pos);
        if (name.text.find('.') != std::string::npos)
            lex_.err("predicate names cannot contain '.'", name.pos);
        Node lit;
        lit.kind = Node::Kind::lit;
        lit.predicate = name.text;
        if (lex_.peek().kind != Tok::lparen)
            lex_.err("expected '(' after predicate", lex_.peek().pos);
        lex_.take();
        lit.args.push_back(term());
        while (lex_.peek().kind == Tok::comma) {
            lex_.take();
            lit.args.push_back(term());
        }
        if (lex_.peek().kind != Tok::rparen)
            lex_.err("expected ')'", lex_.peek().pos);
        lex_.take();
        validate(lit, name.pos);
        return lit;
    }

    void validate(const Node& lit, size_t pos) {
        auto it = predicates_.find(lit.predicate);
        if (it == predicates_.end())
            fail(errc::unknown_predicate, "'" + lit.predicate + "'");
        const PredicateSig& sig = it->second;
        if (static_cast<int>(lit.args.size()) != sig.arity)
            fail(errc::arity_error, lit.predicate + " expects " + std::to_string(sig.arity) +
                                        " arguments, got " + std::to_string(lit.args.size()));
        for (int i = 0; i < static_cast<int>(lit.args.size()); ++i) {
            bool is_list = lit.args[static_cast<size_t>(i)].kind == Term::Kind::pair_list;
            if (i == sig.pair_arg) {
                bool ok = is_list ||
                          lit.args[static_cast<size_t>(i)].kind == Term::Kind::variable ||
                          lit.args[static_cast<size_t>(i)].kind == Term::Kind::wildcard;
                if (lit.predicate == "correlatedMaps")
                    ok = is_list;
                if (!ok)
                    fail(errc::arity_error, "argument " + std::to_string(i + 1) + " of " +
                                                lit.predicate + " must be a pair list");
            } else if (is_list) {
                fail(errc::arity_error, "argument " + std::to_string(i + 1) + " of " +
                                            lit.predicate + " cannot be a pair list");
            }
        }
        (void)pos;
    }

    Term term() {
        const Token& t = lex_.peek();
        switch (t.kind) {
        case Tok::integer: {
            Term out;
            out.kind = Term::Kind::constant;
            out.value = lex_.take().number;
            return out;
        }
        case Tok::string: {
            Term out;
            out.kind = Term::Kind::constant;
            out.value = lex_.take().text;
            return out;
        }
        case Tok::star:
            lex_.take();
            return Term{}; // wildcard
        case Tok::bang: {
            lex_.take();
            Term out;
            out.kind = Term::Kind::neg_const;
            const Token& c = lex_.peek();
            if (c.kind == Tok::integer)
                out.value = lex_.take().number;
            else if (c.kind == Tok::string)
                out.value = lex_.take().text;
            else if (c.kind == Tok::ident && !is_variable_word(c.text) && !is_wildcard_word(c.text))
                out.value = lex_.take().text;
            else
                lex_.err("'!' must precede a constant", c.pos);
            return out;
        }
        case Tok::ident: {
            Token w = lex_.take();
            Term out;
            if (is_wildcard_word(w.text)) {
                out.kind = Term::Kind::wildcard;
            } else if (is_variable_word(w.text)) {
                out.kind = Term::Kind::variable;
                out.name = w.text;
            } else {
                out.kind = Term::Kind::constant;
                out.value = w.text;
            }
            return out;
        }
        case Tok::lbrack:
            return pair_list();
        default:
            lex_.err("expected a term", t.pos);
        }
    }

    Term pair_list() {
        lex_.take(); // '['
        Term out;
        out.kind = Term::Kind::pair_list;
        out.pairs.push_back(pair());
        while (lex_.peek().kind == Tok::comma) {
            lex_.take();
            out.pairs.push_back(pair());
        }
        if (lex_.peek().kind != Tok::rbrack)
            lex_.err("expected ']'", lex_.peek().pos);
        lex_.take();
        return out;
    }

    QPair pair() {
        if (lex_.peek().kind != Tok::lparen)
            lex_.err("expected '(' to open a pair", lex_.peek().pos);
        lex_.take();
        QPair out;
        out.field = term();
        if (out.field.kind == Term::Kind::pair_list ||
            out.field.kind == Term::Kind::neg_const ||
            (out.field.kind == Term::Kind::constant &&
             std::holds_alternative<int64_t>(out.field.value)))
            lex_.err("pair fields are names, variables or wildcards", lex_.peek().pos);
        if (lex_.peek().kind != Tok::comma)
            lex_.err("expected ',' inside a pair", lex_.peek().pos);
        lex_.take();
        out.value = term();
        if (out.value.kind == Term::Kind::pair_list)
            lex_.err("pair values cannot be lists", lex_.peek().pos);
        if (lex_.peek().kind != Tok::rparen)
            lex_.err("expected ')'", lex_.peek().pos);
        lex_.take();
        return out;
    }

    void collect_variables(const Node& node, std::vector<std::string>& out) {
        if (node.kind == Node::Kind::lit) {
            for (const Term& t : node.args)
                collect_term(t, out);
            return;
        }
        for (const Node& child : node.children)
            collect_variables(child, out);
    }

    void collect_term(const Term& t, std::vector<std::string>& out) {
        if (t.kind == Term::Kind::variable) {
            for (const std::string& seen : out)
                if (seen == t.name)
                    return;
            out.push_back(t.name);
        } else if (t.kind == Term::Kind::pair_list) {
            for (const QPair& p : t.pairs) {
                collect_term(p.field, out);
                collect_term(p.value, out);
            }
        }
    }

    Lexer lex_;
    const PredicateTable& predicates_;
};

bool bare_atom_safe(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0])))
        return false;
    if (s == "var")
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '@'))
            return false;
    return true;
}

std::string quote_atom(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

Query parse_query(const std::string& text) {
    return parse_query(text, builtin_query_predicates());
}

Query parse_query(const std::string& text, const PredicateTable& predicates) {
    return Parser(text, predicates).parse();
}

std::string to_string(const Term& term) {
    switch (term.kind) {
    case Term::Kind::constant:
        if (const auto* n = std::get_if<int64_t>(&term.value))
            return std::to_string(*n);
        else {
            const std::string& s = std::get<std::string>(term.value);
            return bare_atom_safe(s) ? s : quote_atom(s);
        }
    case Term::Kind::variable:
        return term.name;
    case Term::Kind::wildcard:
        return "*";
    case Term::Kind::neg_const:
        if (const auto* n = std::get_if<int64_t>(&term.value))
            return "!" + std::to_string(*n);
        else {
            const std::string& s = std::get<std::string>(term.value);
            return "!" + (bare_atom_safe(s) ? s : quote_atom(s));
        }
    case Term::Kind::pair_list: {
        std::string out = "[";
        for (size_t i = 0; i < term.pairs.size(); ++i) {
            if (i)
                out += ", ";
            out += "(" + to_string(term.pairs[i].field) + ", " + to_string(term.pairs[i].value) + ")";
        }
        return out + "]";
    }
    }
    return "*";
}

std::string to_string(const Node& node) {
    switch (node.kind) {
    case Node::Kind::lit: {
        std::string out = node.predicate + "(";
        for (size_t i = 0; i < node.args.size(); ++i) {
            if (i)
                out += ", ";
            out += to_string(node.args[i]);
        }
        return out + ")";
    }
    case Node::Kind::conj: {
        std::string out;
        for (size_t i = 0; i < node.children.size(); ++i) {
            if (i)
                out += ", ";
            const Node& c = node.children[i];
            bool paren = c.kind == Node::Kind::disj;
            out += paren ? "(" + to_string(c) + ")" : to_string(c);
        }
        return out;
    }
    case Node::Kind::disj: {
        std::string out;
        for (size_t i = 0; i < node.children.size(); ++i) {
            if (i)
                out += "; ";
            out += to_string(node.children[i]);
        }
        return out;
    }
    case Node::Kind::neg: {
        const Node& c = node.children.front();
        bool paren = c.kind == Node::Kind::conj || c.kind == Node::Kind::disj;
        return paren ? "!(" + to_string(c) + ")" : "!" + to_string(c);
    }
    }
    return "";
}

std::string to_string(const Query& query) { return to_string(query.root) + "."; }

} // namespace prashna
