#include <charconv>
#include <cstdlib>

#include "relkg/cypher.hpp"
#include "relkg/errors.hpp"
#include "relkg/text.hpp"

namespace relkg::cypher {

namespace {

enum class Tok { Ident, Quoted, Int, Float, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t offset = 0;
};

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (is_identifier_start(c)) {
            while (i < s.size() && is_identifier_char(s[i])) ++i;
            out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            bool is_float = false;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i + 1 < s.size() && s[i] == '.' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
                is_float = true;
                ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                    is_float = true;
                    i = j;
                    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                }
            }
            out.push_back({is_float ? Tok::Float : Tok::Int, std::string(s.substr(start, i - start)), start});
        } else if (c == '`') {
            std::string name;
            ++i;
            while (true) {
                if (i >= s.size()) throw ParseError(start, {"`"}, "unterminated quoted name");
                if (s[i] == '`') {
                    if (i + 1 < s.size() && s[i + 1] == '`') {
                        name += '`';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                name += s[i++];
            }
            out.push_back({Tok::Quoted, std::move(name), start});
        } else if (c == '\'' || c == '"') {
            std::string text;
            ++i;
            while (true) {
                if (i >= s.size()) throw ParseError(start, {std::string(1, c)}, "unterminated string");
                if (s[i] == '\\' && i + 1 < s.size()) {
                    const char n = s[i + 1];
                    text += n == 'n' ? '\n' : (n == 't' ? '\t' : n);
                    i += 2;
                    continue;
                }
                if (s[i] == c) {
                    ++i;
                    break;
                }
                text += s[i++];
            }
            out.push_back({Tok::String, std::move(text), start});
        } else {
            static const std::string_view two[] = {"<>", "!=", "<=", ">=", "=~"};
            std::string p(1, c);
            for (auto t : two) {
                if (s.substr(i, 2) == t) p = std::string(t);
            }
            i += p.size();
            if (std::string_view("()[]{},:.-=<>*").find(c) == std::string_view::npos && p.size() == 1) {
                throw ParseError(start, {}, "unexpected character '" + p + "'");
            }
            out.push_back({Tok::Punct, std::move(p), start});
        }
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    CypherQuery parse_query() {
        CypherQuery q;
        q.parts.push_back(parse_single());
        while (keyword("UNION")) {
            q.union_all.push_back(keyword("ALL"));
            q.parts.push_back(parse_single());
        }
        if (peek().kind != Tok::End) fail({"UNION", "end of input"});
        return q;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        throw ParseError(t.offset, std::move(expected),
                         t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
    }

    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Ident && iequals(peek(ahead).text, kw);
    }
    bool keyword(std::string_view kw) {
        if (!is_keyword(kw)) return false;
        ++pos_;
        return true;
    }
    void expect_keyword(std::string_view kw) {
        if (!keyword(kw)) fail({std::string(kw)});
    }
    bool is_punct(std::string_view p, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
    }
    bool punct(std::string_view p) {
        if (!is_punct(p)) return false;
        ++pos_;
        return true;
    }
    void expect_punct(std::string_view p) {
        if (!punct(p)) fail({std::string(p)});
    }

    std::string name() {
        const Token& t = peek();
        if (t.kind == Tok::Ident || t.kind == Tok::Quoted) {
            ++pos_;
            return t.text;
        }
        fail({"name"});
    }

    std::int64_t integer() {
        const Token& t = peek();
        if (t.kind != Tok::Int) fail({"integer"});
        ++pos_;
        return std::stoll(t.text);
    }

    SingleQuery parse_single() {
        SingleQuery q;
        while (true) {
            if (keyword("MATCH")) {
                Match m;
                do {
                    m.patterns.push_back(parse_path());
                } while (punct(","));
                if (keyword("WHERE")) m.where = parse_expr();
                q.clauses.emplace_back(std::move(m));
            } else if (keyword("WITH")) {
                With w;
                w.distinct = keyword("DISTINCT");
                w.items = parse_items();
                if (keyword("WHERE")) w.where = parse_expr();
                q.clauses.emplace_back(std::move(w));
            } else if (keyword("RETURN")) {
                q.ret.distinct = keyword("DISTINCT");
                q.ret.items = parse_items();
                if (keyword("ORDER")) {
                    expect_keyword("BY");
                    do {
                        OrderItem o{parse_expr()};
                        if (keyword("DESC") || keyword("DESCENDING")) {
                            o.descending = true;
                        } else if (!keyword("ASC")) {
                            keyword("ASCENDING");
                        }
                        q.ret.order_by.push_back(std::move(o));
                    } while (punct(","));
                }
                for (int i = 0; i < 2; ++i) {
                    if (!q.ret.skip && keyword("SKIP")) {
                        q.ret.skip = integer();
                    } else if (!q.ret.limit && keyword("LIMIT")) {
                        q.ret.limit = integer();
                    }
                }
                return q;
            } else {
                fail({"MATCH", "WITH", "RETURN"});
            }
        }
    }

    std::vector<ProjectionItem> parse_items() {
        std::vector<ProjectionItem> items;
        do {
            ProjectionItem item{parse_expr()};
            if (keyword("AS")) item.alias = name();
            items.push_back(std::move(item));
        } while (punct(","));
        return items;
    }

    PropertyList parse_props() {
        PropertyList props;
        if (!punct("{")) return props;
        if (punct("}")) return props;
        do {
            std::string key = name();
            expect_punct(":");
            props.emplace_back(std::move(key), parse_literal_value());
        } while (punct(","));
        expect_punct("}");
        return props;
    }

    NodePattern parse_node() {
        NodePattern n;
        expect_punct("(");
        if (peek().kind == Tok::Ident || peek().kind == Tok::Quoted) n.var = name();
        if (punct(":")) n.label = name();
        n.props = parse_props();
        expect_punct(")");
        return n;
    }

    RelPattern parse_rel() {
        RelPattern r;
        expect_punct("-");
        expect_punct("[");
        if (peek().kind == Tok::Ident || peek().kind == Tok::Quoted) r.var = name();
        if (punct(":")) r.type = name();
        r.props = parse_props();
        expect_punct("]");
        expect_punct("-");
        return r;
    }

    PatternPath parse_path() {
        PatternPath p{parse_node()};
        while (is_punct("-")) {
            PathStep step;
            step.rel = parse_rel();
            step.node = parse_node();
            p.steps.push_back(std::move(step));
        }
        return p;
    }

    Value parse_literal_value() {
        const Token& t = peek();
        bool negative = false;
        if (is_punct("-") && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Float)) {
            negative = true;
            ++pos_;
        }
        const Token& n = peek();
        if (n.kind == Tok::Int) {
            ++pos_;
            std::int64_t v = 0;
            const std::string text = negative ? "-" + n.text : n.text;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc()) return Value::real(std::strtod(text.c_str(), nullptr));
            return Value::integer(v);
        }
        if (n.kind == Tok::Float) {
            ++pos_;
            const double d = std::strtod(n.text.c_str(), nullptr);
            return Value::real(negative ? -d : d);
        }
        if (negative) fail({"number"});
        if (t.kind == Tok::String) {
            ++pos_;
            return Value::text(t.text);
        }
        if (keyword("null")) return Value::null();
        fail({"literal"});
    }

    // Expressions: OR < AND < NOT < predicate < operand.
    Expr parse_expr() {
        Expr e = parse_and();
        while (keyword("OR")) e = or_(std::move(e), parse_and());
        return e;
    }
    Expr parse_and() {
        Expr e = parse_not();
        while (keyword("AND")) e = and_(std::move(e), parse_not());
        return e;
    }
    Expr parse_not() {
        if (keyword("NOT")) return not_(parse_not());
        return parse_predicate();
    }
    Expr parse_predicate() {
        Expr lhs = parse_operand();
        static const std::pair<std::string_view, CompareOp> ops[] = {
            {"=", CompareOp::Eq}, {"<>", CompareOp::Ne}, {"!=", CompareOp::Ne}, {"<", CompareOp::Lt},
            {"<=", CompareOp::Le}, {">", CompareOp::Gt}, {">=", CompareOp::Ge}};
        for (const auto& [text, op] : ops) {
            if (punct(text)) return cmp(op, std::move(lhs), parse_operand());
        }
        if (punct("=~")) return Expr{StringMatch{StringOp::Regex, std::move(lhs), parse_operand()}};
        if (keyword("CONTAINS")) return Expr{StringMatch{StringOp::Contains, std::move(lhs), parse_operand()}};
        if (keyword("STARTS")) {
            expect_keyword("WITH");
            return Expr{StringMatch{StringOp::StartsWith, std::move(lhs), parse_operand()}};
        }
        if (keyword("ENDS")) {
            expect_keyword("WITH");
            return Expr{StringMatch{StringOp::EndsWith, std::move(lhs), parse_operand()}};
        }
        if (keyword("IN")) return Expr{In{std::move(lhs), parse_operand()}};
        if (keyword("IS")) {
            const bool negated = keyword("NOT");
            expect_keyword("NULL");
            return Expr{IsNull{std::move(lhs), negated}};
        }
        return lhs;
    }

    std::optional<AggFn> aggregate_name() const {
        if (peek().kind != Tok::Ident || !is_punct("(", 1)) return std::nullopt;
        static const std::pair<std::string_view, AggFn> fns[] = {{"count", AggFn::Count}, {"avg", AggFn::Avg},
                                                                 {"max", AggFn::Max},     {"min", AggFn::Min},
                                                                 {"sum", AggFn::Sum},     {"collect", AggFn::Collect}};
        for (const auto& [text, fn] : fns) {
            if (iequals(peek().text, text)) return fn;
        }
        return std::nullopt;
    }

    Expr parse_operand() {
        const Token& t = peek();
        if (t.kind == Tok::String || t.kind == Tok::Int || t.kind == Tok::Float || is_keyword("null") ||
            (is_punct("-") && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Float))) {
            return lit(parse_literal_value());
        }
        if (punct("[")) {
            ListLiteral list;
            if (!punct("]")) {
                do {
                    list.items.push_back(parse_expr());
                } while (punct(","));
                expect_punct("]");
            }
            return Expr{std::move(list)};
        }
        if (auto fn = aggregate_name()) {
            pos_ += 2;
            Aggregate a{*fn};
            if (*fn == AggFn::Count && punct("*")) {
                a.star = true;
            } else {
                a.distinct = keyword("DISTINCT");
                a.arg = Box<Expr>(parse_expr());
            }
            expect_punct(")");
            return Expr{std::move(a)};
        }
        if (is_punct("(")) {
            // A parenthesized node followed by '-' starts a pattern predicate.
            const std::size_t save = pos_;
            try {
                parse_node();
                const bool pattern = is_punct("-");
                pos_ = save;
                if (pattern) return Expr{PatternPredicate{parse_path()}};
            } catch (const ParseError&) {
                pos_ = save;
            }
            expect_punct("(");
            Expr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (t.kind == Tok::Ident || t.kind == Tok::Quoted) {
            std::string v = name();
            if (punct(".")) return prop(std::move(v), name());
            return var(std::move(v));
        }
        fail({"expression"});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

CypherQuery parse_cypher(std::string_view text) { return Parser(text).parse_query(); }

}  // namespace relkg::cypher
