#include "relkg/sql_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "relkg/text.hpp"

namespace relkg::sql {

namespace {

enum class Tok { Ident, QuotedIdent, DoubleQuoted, String, Integer, Float, Op, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t offset = 0;
};

constexpr std::array kReserved = {
    "SELECT", "FROM",  "WHERE",  "GROUP",    "BY",      "HAVING", "ORDER",   "LIMIT", "OFFSET",
    "UNION",  "ALL",   "JOIN",   "INNER",    "ON",      "AS",     "AND",     "OR",    "NOT",
    "IN",     "LIKE",  "BETWEEN", "IS",      "NULL",    "DISTINCT", "ASC",   "DESC",  "LEFT",
    "RIGHT",  "OUTER", "CROSS",  "FULL",     "NATURAL", "USING",  "EXCEPT",  "INTERSECT",
    "CASE",   "WHEN",  "THEN",   "ELSE",     "END",     "EXISTS",
};

bool is_reserved(std::string_view word) {
    return std::any_of(kReserved.begin(), kReserved.end(), [&](const char* k) { return iequals(word, k); });
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t;
            t.offset = pos_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (c == '\'') {
                t.kind = Tok::String;
                t.text = quoted('\'');
            } else if (c == '"') {
                t.kind = Tok::DoubleQuoted;
                t.text = quoted('"');
            } else if (c == '`') {
                t.kind = Tok::QuotedIdent;
                t.text = quoted('`');
            } else if (c == '[') {
                t.kind = Tok::QuotedIdent;
                t.text = quoted(']');
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && pos_ + 1 < src_.size() &&
                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                number(t);
            } else if (is_identifier_start(c)) {
                t.kind = Tok::Ident;
                const std::size_t start = pos_;
                while (pos_ < src_.size() && is_identifier_char(src_[pos_])) ++pos_;
                t.text = std::string(src_.substr(start, pos_ - start));
            } else {
                t.kind = Tok::Op;
                static constexpr std::array two = {"<=", ">=", "!=", "<>", "=="};
                std::string_view rest = src_.substr(pos_);
                bool matched = false;
                for (const char* op : two) {
                    if (rest.substr(0, 2) == op) {
                        t.text = op;
                        pos_ += 2;
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    t.text = std::string(1, c);
                    ++pos_;
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    void skip_space() {
        while (pos_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
            } else if (src_.substr(pos_, 2) == "--") {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string quoted(char close) {
        const std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == close) {
                if (close != ']' && pos_ + 1 < src_.size() && src_[pos_ + 1] == close) {
                    out += c;
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                return out;
            }
            out += c;
            ++pos_;
        }
        throw ParseError(start, {}, "unterminated quoted token");
    }

    void number(Token& t) {
        const std::size_t start = pos_;
        bool is_float = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            is_float = true;
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                is_float = true;
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        if (pos_ < src_.size() && is_identifier_char(src_[pos_])) {
            throw ParseError(start, {}, "malformed number");
        }
        t.kind = is_float ? Tok::Float : Tok::Integer;
        t.text = std::string(src_.substr(start, pos_ - start));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

Expr make(Expr::Node n) { return Expr{std::move(n)}; }

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

    Select statement() {
        Select s = compound();
        accept_op(";");
        if (peek().kind != Tok::End) fail("end of query");
        return s;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }

    void note_expected(std::string what) {
        const std::size_t off = peek().offset;
        if (off > fail_offset_) {
            fail_offset_ = off;
            expected_.clear();
        }
        if (off == fail_offset_ && std::find(expected_.begin(), expected_.end(), what) == expected_.end()) {
            expected_.push_back(std::move(what));
        }
    }

    [[noreturn]] void fail(const std::string& what) {
        note_expected(what);
        const Token& t = peek();
        const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        if (t.offset == fail_offset_) throw ParseError(t.offset, expected_, "unexpected " + found);
        throw ParseError(t.offset, {what}, "unexpected " + found);
    }

    [[noreturn]] void unsupported(const std::string& what) {
        throw ParseError(peek().offset, {}, "unsupported construct: " + what);
    }

    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Ident && iequals(t.text, kw);
    }

    bool accept_keyword(std::string_view kw) {
        if (is_keyword(kw)) {
            ++pos_;
            return true;
        }
        note_expected(std::string(kw));
        return false;
    }

    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) fail(std::string(kw));
    }

    bool is_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Op && t.text == op;
    }

    bool accept_op(std::string_view op) {
        if (is_op(op)) {
            ++pos_;
            return true;
        }
        note_expected("'" + std::string(op) + "'");
        return false;
    }

    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail("'" + std::string(op) + "'");
    }

    std::string identifier(bool allow_double_quoted = true) {
        const Token& t = peek();
        if ((t.kind == Tok::Ident && !is_reserved(t.text)) || t.kind == Tok::QuotedIdent ||
            (allow_double_quoted && t.kind == Tok::DoubleQuoted)) {
            ++pos_;
            return t.text;
        }
        fail("identifier");
    }

    bool at_alias() const {
        const Token& t = peek();
        return (t.kind == Tok::Ident && !is_reserved(t.text)) || t.kind == Tok::QuotedIdent;
    }

    std::int64_t integer() {
        const Token& t = peek();
        if (t.kind != Tok::Integer) fail("integer");
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{}) fail("integer");
        ++pos_;
        return v;
    }

    Select compound() {
        Select head = core();
        Select* tail = &head;
        std::vector<Select*> chain{&head};
        while (accept_keyword("UNION")) {
            if (!tail->order_by.empty() || tail->limit || tail->offset) {
                unsupported("ORDER BY / LIMIT before UNION");
            }
            const bool all = accept_keyword("ALL");
            tail->union_with = UnionPart{all, Box<Select>(core())};
            tail = &*tail->union_with->next;
        }
        if (tail != &head) {
            head.order_by = std::move(tail->order_by);
            head.limit = tail->limit;
            head.offset = tail->offset;
            tail->order_by.clear();
            tail->limit.reset();
            tail->offset.reset();
        }
        if (is_keyword("EXCEPT") || is_keyword("INTERSECT")) unsupported(to_upper(peek().text));
        return head;
    }

    Select core() {
        Select s;
        expect_keyword("SELECT");
        if (accept_keyword("DISTINCT")) {
            s.distinct = true;
        } else {
            accept_keyword("ALL");
        }
        do {
            s.items.push_back(select_item());
        } while (accept_op(","));
        expect_keyword("FROM");
        from_list(s);
        if (accept_keyword("WHERE")) s.where = expr();
        if (accept_keyword("GROUP")) {
            expect_keyword("BY");
            do {
                s.group_by.push_back(expr());
            } while (accept_op(","));
        }
        if (accept_keyword("HAVING")) s.having = expr();
        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            do {
                OrderItem item{expr(), false};
                if (accept_keyword("DESC")) {
                    item.descending = true;
                } else {
                    accept_keyword("ASC");
                }
                s.order_by.push_back(std::move(item));
            } while (accept_op(","));
        }
        if (accept_keyword("LIMIT")) {
            const std::int64_t first = integer();
            if (accept_op(",")) {
                s.offset = first;
                s.limit = integer();
            } else {
                s.limit = first;
                if (accept_keyword("OFFSET")) s.offset = integer();
            }
        } else if (accept_keyword("OFFSET")) {
            s.offset = integer();
        }
        return s;
    }

    SelectItem select_item() {
        SelectItem item;
        if (accept_op("*")) {
            item.star = true;
            return item;
        }
        if ((peek().kind == Tok::Ident || peek().kind == Tok::QuotedIdent) && is_op(".", 1) && is_op("*", 2)) {
            unsupported("qualified star");
        }
        item.expr = expr();
        if (accept_keyword("AS")) {
            item.alias = identifier();
        } else if (at_alias()) {
            item.alias = identifier();
        }
        return item;
    }

    TableRef table_ref() {
        if (is_op("(")) unsupported("subquery in FROM");
        TableRef t;
        t.name = identifier();
        if (is_op(".")) unsupported("schema-qualified table name");
        if (accept_keyword("AS")) {
            t.alias = identifier();
        } else if (at_alias()) {
            t.alias = identifier();
        }
        return t;
    }

    void from_list(Select& s) {
        s.from.push_back(FromItem{table_ref(), std::nullopt});
        while (true) {
            if (accept_op(",")) {
                s.from.push_back(FromItem{table_ref(), std::nullopt});
                continue;
            }
            for (const char* kw : {"LEFT", "RIGHT", "FULL", "OUTER", "CROSS", "NATURAL"}) {
                if (is_keyword(kw)) unsupported(std::string(kw) + " JOIN");
            }
            const bool inner = accept_keyword("INNER");
            if (!accept_keyword("JOIN")) {
                if (inner) fail("JOIN");
                break;
            }
            FromItem item{table_ref(), std::nullopt};
            if (is_keyword("USING")) unsupported("JOIN ... USING");
            if (accept_keyword("ON")) item.on = expr();
            s.from.push_back(std::move(item));
        }
    }

    Expr expr() { return or_expr(); }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (accept_keyword("OR")) lhs = make(Or{Box<Expr>(std::move(lhs)), Box<Expr>(and_expr())});
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (accept_keyword("AND")) lhs = make(And{Box<Expr>(std::move(lhs)), Box<Expr>(not_expr())});
        return lhs;
    }

    Expr not_expr() {
        if (accept_keyword("NOT")) return make(Not{Box<Expr>(not_expr())});
        if (is_keyword("EXISTS")) unsupported("EXISTS");
        return predicate();
    }

    Expr predicate() {
        Expr lhs = operand();
        static constexpr std::array<std::pair<const char*, CompareOp>, 8> ops = {{
            {"=", CompareOp::Eq}, {"==", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<>", CompareOp::Ne},
            {"<=", CompareOp::Le}, {">=", CompareOp::Ge}, {"<", CompareOp::Lt}, {">", CompareOp::Gt},
        }};
        for (const auto& [sym, op] : ops) {
            if (accept_op(sym)) {
                Expr rhs = operand();
                return make(Comparison{op, Box<Expr>(std::move(lhs)), Box<Expr>(std::move(rhs))});
            }
        }
        for (const char* arith : {"+", "-", "*", "/", "%", "||"}) {
            if (is_op(arith)) unsupported("arithmetic operator '" + std::string(arith) + "'");
        }
        if (accept_keyword("IS")) {
            const bool neg = accept_keyword("NOT");
            expect_keyword("NULL");
            return make(IsNull{Box<Expr>(std::move(lhs)), neg});
        }
        const bool negated = accept_keyword("NOT");
        if (accept_keyword("LIKE")) {
            return make(Like{Box<Expr>(std::move(lhs)), Box<Expr>(operand()), negated});
        }
        if (accept_keyword("IN")) {
            expect_op("(");
            if (is_keyword("SELECT")) {
                Select sub = compound();
                expect_op(")");
                return make(InSubquery{Box<Expr>(std::move(lhs)), Box<Select>(std::move(sub)), negated});
            }
            InList list{Box<Expr>(std::move(lhs)), {}, negated};
            do {
                list.items.push_back(operand());
            } while (accept_op(","));
            expect_op(")");
            return make(std::move(list));
        }
        if (accept_keyword("BETWEEN")) {
            Expr lo = operand();
            expect_keyword("AND");
            Expr hi = operand();
            Expr both = make(And{Box<Expr>(make(Comparison{CompareOp::Ge, Box<Expr>(lhs), Box<Expr>(std::move(lo))})),
                                 Box<Expr>(make(Comparison{CompareOp::Le, Box<Expr>(lhs), Box<Expr>(std::move(hi))}))});
            if (negated) return make(Not{Box<Expr>(std::move(both))});
            return both;
        }
        if (negated) fail("LIKE, IN or BETWEEN");
        return lhs;
    }

    Expr operand() {
        const Token& t = peek();
        if (accept_op("(")) {
            if (is_keyword("SELECT")) {
                Select sub = compound();
                expect_op(")");
                return make(ScalarSubquery{Box<Select>(std::move(sub))});
            }
            Expr inner = expr();
            expect_op(")");
            return inner;
        }
        if (is_op("-") || is_op("+")) {
            const bool negative = is_op("-");
            const Token& num = peek(1);
            if (num.kind == Tok::Integer || num.kind == Tok::Float) {
                ++pos_;
                Value v = number_value(peek());
                ++pos_;
                if (negative) v = v.kind() == ValueKind::Integer ? Value::integer(-v.as_integer()) : Value::real(-v.as_float());
                return make(Literal{std::move(v)});
            }
            unsupported("arithmetic operator");
        }
        if (t.kind == Tok::Integer || t.kind == Tok::Float) {
            Value v = number_value(t);
            ++pos_;
            return make(Literal{std::move(v)});
        }
        if (t.kind == Tok::String || t.kind == Tok::DoubleQuoted) {
            ++pos_;
            return make(Literal{Value::text(t.text)});
        }
        if (is_keyword("NULL")) {
            ++pos_;
            return make(Literal{Value::null()});
        }
        if (is_keyword("CASE")) unsupported("CASE");
        if (t.kind == Tok::Ident && is_op("(", 1)) return function_call();
        if ((t.kind == Tok::Ident && !is_reserved(t.text)) || t.kind == Tok::QuotedIdent) {
            ColumnRef ref;
            std::string first = identifier(false);
            if (accept_op(".")) {
                ref.table = std::move(first);
                ref.column = identifier();
            } else {
                ref.column = std::move(first);
            }
            return make(std::move(ref));
        }
        note_expected("literal");
        note_expected("column");
        fail("expression");
    }

    Value number_value(const Token& t) {
        if (t.kind == Tok::Integer) {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec == std::errc{}) return Value::integer(v);
        }
        return Value::real(std::strtod(t.text.c_str(), nullptr));
    }

    Expr function_call() {
        const std::string name = to_lower(peek().text);
        static constexpr std::array<std::pair<const char*, AggFn>, 5> fns = {{
            {"count", AggFn::Count}, {"avg", AggFn::Avg}, {"max", AggFn::Max}, {"min", AggFn::Min}, {"sum", AggFn::Sum},
        }};
        auto it = std::find_if(fns.begin(), fns.end(), [&](const auto& f) { return name == f.first; });
        if (it == fns.end()) unsupported("function " + name);
        ++pos_;
        expect_op("(");
        Aggregate agg;
        agg.fn = it->second;
        if (agg.fn == AggFn::Count && accept_op("*")) {
            agg.star = true;
        } else {
            agg.distinct = accept_keyword("DISTINCT");
            agg.arg = Box<Expr>(expr());
        }
        expect_op(")");
        return make(std::move(agg));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t fail_offset_ = 0;
    std::vector<std::string> expected_;
};

}  // namespace

Select parse_sql(std::string_view text) { return Parser(text).statement(); }

std::variant<Select, ParseError> try_parse_sql(std::string_view text) {
    try {
        return parse_sql(text);
    } catch (const ParseError& e) {
        return e;
    }
}

}  // namespace relkg::sql
