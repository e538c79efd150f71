#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>

#include "relkg/errors.hpp"
#include "relkg/loaders.hpp"
#include "relkg/text.hpp"

namespace relkg {

namespace {

enum class Tok { Ident, QuotedIdent, String, Number, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier/string contents, punctuation char, number spelling
    std::size_t offset = 0;
    std::size_t length = 0;
};

class DumpLexer {
public:
    explicit DumpLexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (pos_ >= src_.size()) break;
            out.push_back(next());
        }
        return out;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                const auto end = src_.find("*/", pos_ + 2);
                pos_ = end == std::string_view::npos ? src_.size() : end + 2;
            } else {
                break;
            }
        }
    }

    Token quoted(char close, Tok kind) {
        Token t;
        t.kind = kind;
        t.offset = pos_;
        ++pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == close) {
                if (close != ']' && pos_ + 1 < src_.size() && src_[pos_ + 1] == close) {
                    t.text += c;
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                t.length = pos_ - t.offset;
                return t;
            }
            t.text += c;
            ++pos_;
        }
        throw DumpSyntaxError(t.offset, "unterminated quoted token");
    }

    Token next() {
        const char c = src_[pos_];
        if (c == '\'') return quoted('\'', Tok::String);
        if (c == '"') return quoted('"', Tok::QuotedIdent);
        if (c == '`') return quoted('`', Tok::QuotedIdent);
        if (c == '[') return quoted(']', Tok::QuotedIdent);
        Token t;
        t.offset = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            t.kind = Tok::Number;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                    ((src_[pos_] == '+' || src_[pos_] == '-') &&
                     (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')))) {
                ++pos_;
            }
        } else if (is_identifier_start(c) || static_cast<unsigned char>(c) >= 0x80) {
            t.kind = Tok::Ident;
            while (pos_ < src_.size() && (is_identifier_char(src_[pos_]) || src_[pos_] == '$' ||
                                          static_cast<unsigned char>(src_[pos_]) >= 0x80)) {
                ++pos_;
            }
        } else {
            t.kind = Tok::Punct;
            ++pos_;
        }
        t.length = pos_ - t.offset;
        t.text = std::string(src_.substr(t.offset, t.length));
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

TypeTag type_tag_for(const std::string& type_name) {
    const std::string t = to_upper(type_name);
    if (t.empty()) return TypeTag::Unknown;
    if (t.find("INT") != std::string::npos) return TypeTag::Int;
    if (t.find("CHAR") != std::string::npos || t.find("CLOB") != std::string::npos ||
        t.find("TEXT") != std::string::npos || t.find("STRING") != std::string::npos) {
        return TypeTag::Text;
    }
    if (t.find("REAL") != std::string::npos || t.find("FLOA") != std::string::npos ||
        t.find("DOUB") != std::string::npos || t.find("NUMERIC") != std::string::npos ||
        t.find("DECIMAL") != std::string::npos || t.find("NUMBER") != std::string::npos) {
        return TypeTag::Real;
    }
    return TypeTag::Unknown;
}

/// Cursor over one statement's tokens.
class StatementParser {
public:
    StatementParser(std::string_view src, const std::vector<Token>& toks, std::size_t begin,
                    std::size_t end)
        : src_(src), toks_(toks), pos_(begin), end_(end) {}

    bool at_end() const { return pos_ >= end_; }
    const Token& peek(std::size_t ahead = 0) const {
        static const Token sentinel{};
        return pos_ + ahead < end_ ? toks_[pos_ + ahead] : sentinel;
    }
    std::size_t offset() const {
        return at_end() ? (end_ > 0 && end_ <= toks_.size() ? toks_[end_ - 1].offset : 0)
                        : peek().offset;
    }

    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Ident && iequals(t.text, kw);
    }
    bool accept_keyword(std::string_view kw) {
        if (!is_keyword(kw)) return false;
        ++pos_;
        return true;
    }
    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) fail("expected " + std::string(kw));
    }
    bool is_punct(char c, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Punct && t.text.size() == 1 && t.text[0] == c;
    }
    bool accept_punct(char c) {
        if (!is_punct(c)) return false;
        ++pos_;
        return true;
    }
    void expect_punct(char c) {
        if (!accept_punct(c)) fail(std::string("expected '") + c + "'");
    }

    std::string identifier() {
        const Token& t = peek();
        if (t.kind == Tok::Ident || t.kind == Tok::QuotedIdent || t.kind == Tok::String) {
            ++pos_;
            return t.text;
        }
        fail("expected identifier");
    }

    /// Possibly schema-qualified name; the qualifier (e.g. main.) is dropped.
    std::string table_name() {
        std::string name = identifier();
        while (accept_punct('.')) name = identifier();
        return name;
    }

    std::vector<std::string> column_list() {
        std::vector<std::string> cols;
        expect_punct('(');
        do {
            cols.push_back(identifier());
            accept_keyword("ASC") || accept_keyword("DESC");
            if (accept_keyword("COLLATE")) identifier();
        } while (accept_punct(','));
        expect_punct(')');
        return cols;
    }

    /// Skip a balanced token run up to (not including) ',' or ')' at depth 0.
    void skip_element_rest() {
        int depth = 0;
        while (!at_end()) {
            if (depth == 0 && (is_punct(',') || is_punct(')'))) return;
            if (is_punct('(')) ++depth;
            if (is_punct(')')) --depth;
            ++pos_;
        }
    }

    void skip_balanced_parens() {
        expect_punct('(');
        int depth = 1;
        while (!at_end() && depth > 0) {
            if (is_punct('(')) ++depth;
            if (is_punct(')')) --depth;
            ++pos_;
        }
        if (depth != 0) fail("unbalanced parentheses");
    }

    /// REFERENCES tbl [(cols)] [ON DELETE ...|MATCH ...|DEFERRABLE ...]
    ForeignKey references_clause(std::vector<std::string> columns) {
        ForeignKey fk;
        fk.columns = std::move(columns);
        fk.referenced_table = table_name();
        if (is_punct('(')) fk.referenced_columns = column_list();
        skip_element_rest();
        fk.origin = KeyOrigin::Declared;
        return fk;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw DumpSyntaxError(offset(), msg); }

    Value literal() {
        bool negative = false;
        if (is_punct('-') || is_punct('+')) {
            negative = peek().text == "-";
            ++pos_;
        }
        const Token& t = peek();
        if (t.kind == Tok::String) {
            ++pos_;
            return Value::text(t.text);
        }
        if (t.kind == Tok::Number) {
            ++pos_;
            Value v = parse_lenient_literal((negative ? "-" : "") + t.text);
            return v;
        }
        if (t.kind == Tok::Ident && iequals(t.text, "NULL")) {
            ++pos_;
            return Value::null();
        }
        // Anything else: verbatim source text of the element.
        const std::size_t start = t.offset;
        std::size_t stop = start;
        int depth = 0;
        while (!at_end()) {
            if (depth == 0 && (is_punct(',') || is_punct(')'))) break;
            if (is_punct('(')) ++depth;
            if (is_punct(')')) --depth;
            stop = peek().offset + peek().length;
            ++pos_;
        }
        std::string verbatim(src_.substr(start, stop - start));
        if (negative) verbatim = "-" + verbatim;
        return Value::text(std::move(verbatim));
    }

private:
    std::string_view src_;
    const std::vector<Token>& toks_;
    std::size_t pos_;
    std::size_t end_;
};

Table parse_create_table(StatementParser& p) {
    p.expect_keyword("CREATE");
    p.accept_keyword("TEMP") || p.accept_keyword("TEMPORARY");
    p.expect_keyword("TABLE");
    if (p.accept_keyword("IF")) {
        p.expect_keyword("NOT");
        p.expect_keyword("EXISTS");
    }
    Table t;
    t.name = p.table_name();
    if (p.is_keyword("AS")) p.fail("CREATE TABLE ... AS SELECT is not supported");
    p.expect_punct('(');
    while (true) {
        if (p.accept_keyword("CONSTRAINT")) p.identifier();
        if (p.accept_keyword("PRIMARY")) {
            p.expect_keyword("KEY");
            t.primary_key = p.column_list();
            p.skip_element_rest();
        } else if (p.accept_keyword("FOREIGN")) {
            p.expect_keyword("KEY");
            auto cols = p.column_list();
            p.expect_keyword("REFERENCES");
            t.foreign_keys.push_back(p.references_clause(std::move(cols)));
        } else if (p.accept_keyword("UNIQUE") || p.accept_keyword("CHECK")) {
            p.skip_balanced_parens();
            p.skip_element_rest();
        } else {
            Column col;
            col.name = p.identifier();
            std::string type_name;
            while (p.peek().kind == Tok::Ident && !p.is_keyword("PRIMARY") && !p.is_keyword("NOT") &&
                   !p.is_keyword("NULL") && !p.is_keyword("UNIQUE") && !p.is_keyword("DEFAULT") &&
                   !p.is_keyword("REFERENCES") && !p.is_keyword("CHECK") &&
                   !p.is_keyword("CONSTRAINT") && !p.is_keyword("COLLATE") &&
                   !p.is_keyword("GENERATED") && !p.is_keyword("AUTOINCREMENT")) {
                if (!type_name.empty()) type_name += ' ';
                type_name += p.identifier();
            }
            if (p.is_punct('(')) p.skip_balanced_parens();  // VARCHAR(255), DECIMAL(10,2)
            col.type = type_tag_for(type_name);
            // Column constraints.
            while (!p.at_end() && !p.is_punct(',') && !p.is_punct(')')) {
                if (p.accept_keyword("CONSTRAINT")) {
                    p.identifier();
                } else if (p.accept_keyword("PRIMARY")) {
                    p.expect_keyword("KEY");
                    p.accept_keyword("ASC") || p.accept_keyword("DESC");
                    t.primary_key = {col.name};
                } else if (p.accept_keyword("REFERENCES")) {
                    t.foreign_keys.push_back(p.references_clause({col.name}));
                } else if (p.accept_keyword("DEFAULT")) {
                    if (p.is_punct('(')) {
                        p.skip_balanced_parens();
                    } else {
                        p.literal();
                    }
                } else if (p.accept_keyword("CHECK")) {
                    p.skip_balanced_parens();
                } else {
                    // NOT NULL, NULL, UNIQUE, AUTOINCREMENT, COLLATE x, ON CONFLICT ...
                    if (p.is_punct('(')) {
                        p.skip_balanced_parens();
                    } else {
                        p.identifier();
                    }
                }
            }
            t.columns.push_back(std::move(col));
        }
        if (p.accept_punct(',')) continue;
        p.expect_punct(')');
        break;
    }
    while (!p.at_end()) p.identifier();  // WITHOUT ROWID, STRICT
    if (t.columns.empty()) p.fail("table " + t.name + " declares no columns");
    for (const auto& pk : t.primary_key) {
        if (!t.has_column(pk)) p.fail("primary key column " + pk + " not declared in " + t.name);
    }
    for (const auto& fk : t.foreign_keys) {
        for (const auto& c : fk.columns) {
            if (!t.has_column(c)) p.fail("foreign key column " + c + " not declared in " + t.name);
        }
        if (!fk.referenced_columns.empty() && fk.referenced_columns.size() != fk.columns.size()) {
            p.fail("foreign key arity mismatch in " + t.name);
        }
    }
    return t;
}

void parse_insert(StatementParser& p, RelationalDatabase& db, std::size_t stmt_offset) {
    p.expect_keyword("INSERT");
    if (p.accept_keyword("OR")) p.identifier();
    p.expect_keyword("INTO");
    const std::string name = p.table_name();
    Table* t = db.find_table(name);
    if (!t) {
        db.warnings.push_back("offset " + std::to_string(stmt_offset) + ": INSERT into unknown table " +
                              name + " skipped");
        return;
    }
    std::vector<std::size_t> targets;
    if (p.is_punct('(')) {
        for (const auto& c : p.column_list()) {
            auto idx = t->column_index(c);
            if (!idx) p.fail("unknown column " + c + " in INSERT into " + name);
            targets.push_back(*idx);
        }
    } else {
        for (std::size_t i = 0; i < t->columns.size(); ++i) targets.push_back(i);
    }
    p.expect_keyword("VALUES");
    do {
        p.expect_punct('(');
        std::vector<Value> values;
        if (!p.is_punct(')')) {
            do {
                values.push_back(p.literal());
            } while (p.accept_punct(','));
        }
        p.expect_punct(')');
        if (values.size() != targets.size()) {
            db.warnings.push_back("offset " + std::to_string(stmt_offset) + ": INSERT into " + name +
                                  " has " + std::to_string(values.size()) + " values for " +
                                  std::to_string(targets.size()) + " columns; row skipped");
            continue;
        }
        Row row(t->columns.size());
        for (std::size_t i = 0; i < targets.size(); ++i) row[targets[i]] = std::move(values[i]);
        t->rows.push_back(std::move(row));
    } while (p.accept_punct(','));
    if (!p.at_end()) p.fail("unexpected tokens after INSERT values");
}

void resolve_reference_columns(RelationalDatabase& db) {
    for (auto& t : db.tables) {
        for (auto& fk : t.foreign_keys) {
            if (!fk.referenced_columns.empty()) continue;
            const Table* target = db.find_table(fk.referenced_table);
            if (target && target->primary_key.size() == fk.columns.size()) {
                fk.referenced_columns = target->primary_key;
            } else {
                fk.referenced_columns = fk.columns;
                db.warnings.push_back("foreign key " + t.name + "(" + fk.columns.front() +
                                      ") names no referenced columns; assuming same names");
            }
        }
    }
}

std::string statement_head(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
    std::string head;
    for (std::size_t i = begin; i < end && i < begin + 3; ++i) {
        if (!head.empty()) head += ' ';
        head += toks[i].text;
    }
    return head;
}

}  // namespace

Value parse_lenient_literal(std::string_view token) {
    const std::string_view s = trim(token);
    if (s.empty()) return Value::text(std::string(token));
    if (iequals(s, "NULL")) return Value::null();
    std::int64_t i = 0;
    auto [iend, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (iec == std::errc{} && iend == s.data() + s.size()) return Value::integer(i);
    std::string_view body = s;
    if (!body.empty() && (body.front() == '+')) body.remove_prefix(1);
    const bool looks_numeric =
        !body.empty() && (std::isdigit(static_cast<unsigned char>(body.front())) || body.front() == '-' ||
                          body.front() == '.');
    if (looks_numeric) {
        const std::string copy(body);
        char* endp = nullptr;
        const double d = std::strtod(copy.c_str(), &endp);
        if (endp == copy.c_str() + copy.size()) return Value::real(d);
    }
    return Value::text(std::string(token));
}

RelationalDatabase load_sql_dump(std::string_view text, std::string name) {
    RelationalDatabase db;
    db.name = std::move(name);
    const std::vector<Token> toks = DumpLexer(text).run();
    std::size_t begin = 0;
    while (begin < toks.size()) {
        std::size_t end = begin;
        while (end < toks.size() && !(toks[end].kind == Tok::Punct && toks[end].text == ";")) ++end;
        if (end > begin) {
            StatementParser p(text, toks, begin, end);
            const std::size_t stmt_offset = toks[begin].offset;
            if (p.is_keyword("CREATE") &&
                (p.is_keyword("TABLE", 1) ||
                 ((p.is_keyword("TEMP", 1) || p.is_keyword("TEMPORARY", 1)) && p.is_keyword("TABLE", 2)))) {
                Table t;
                try {
                    t = parse_create_table(p);
                } catch (const DumpSyntaxError& e) {
                    throw DumpSyntaxError(stmt_offset, e.what());
                }
                if (db.find_table(t.name)) {
                    throw DumpSyntaxError(stmt_offset, "duplicate table " + t.name);
                }
                db.tables.push_back(std::move(t));
            } else if (p.is_keyword("INSERT")) {
                try {
                    parse_insert(p, db, stmt_offset);
                } catch (const DumpSyntaxError& e) {
                    db.warnings.push_back("offset " + std::to_string(stmt_offset) +
                                          ": unparseable INSERT skipped: " + e.what());
                }
            } else {
                db.warnings.push_back("offset " + std::to_string(stmt_offset) +
                                      ": skipped statement: " + statement_head(toks, begin, end));
            }
        }
        begin = end + 1;
    }
    resolve_reference_columns(db);
    return db;
}

}  // namespace relkg
