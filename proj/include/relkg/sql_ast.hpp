#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/box.hpp"
#include "relkg/value.hpp"

namespace relkg::sql {

enum class AggFn { Count, Avg, Max, Min, Sum };

std::string_view to_string(AggFn fn);

struct Expr;
struct Select;

struct Literal {
    Value value;
    friend bool operator==(const Literal&, const Literal&) = default;
};

/// `table.column` or bare `column` (table empty).
struct ColumnRef {
    std::string table;
    std::string column;
    friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

/// count(*) has star set and no argument.
struct Aggregate {
    AggFn fn = AggFn::Count;
    bool distinct = false;
    bool star = false;
    std::optional<Box<Expr>> arg;
    friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct Comparison {
    CompareOp op = CompareOp::Eq;
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct Like {
    Box<Expr> operand;
    Box<Expr> pattern;
    bool negated = false;
    friend bool operator==(const Like&, const Like&) = default;
};

struct InList {
    Box<Expr> operand;
    std::vector<Expr> items;
    bool negated = false;
    friend bool operator==(const InList&, const InList&);
};

struct InSubquery {
    Box<Expr> operand;
    Box<Select> subquery;
    bool negated = false;
    friend bool operator==(const InSubquery&, const InSubquery&);
};

/// `(SELECT ...)` used as a scalar operand.
struct ScalarSubquery {
    Box<Select> subquery;
    friend bool operator==(const ScalarSubquery&, const ScalarSubquery&);
};

struct IsNull {
    Box<Expr> operand;
    bool negated = false;
    friend bool operator==(const IsNull&, const IsNull&) = default;
};

struct And {
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const And&, const And&) = default;
};

struct Or {
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const Or&, const Or&) = default;
};

struct Not {
    Box<Expr> operand;
    friend bool operator==(const Not&, const Not&) = default;
};

struct Expr {
    using Node = std::variant<Literal, ColumnRef, Aggregate, Comparison, Like, InList, InSubquery,
                              ScalarSubquery, IsNull, And, Or, Not>;
    Node node;

    template <class T>
    bool is() const { return std::holds_alternative<T>(node); }
    template <class T>
    const T& as() const { return std::get<T>(node); }
    template <class T>
    T& as() { return std::get<T>(node); }

    friend bool operator==(const Expr&, const Expr&) = default;
};

struct SelectItem {
    bool star = false;  // SELECT *
    std::optional<Expr> expr;
    std::string alias;
    friend bool operator==(const SelectItem&, const SelectItem&) = default;
};

struct TableRef {
    std::string name;
    std::string alias;
    /// The name used to qualify columns: alias when present.
    const std::string& binding_name() const { return alias.empty() ? name : alias; }
    friend bool operator==(const TableRef&, const TableRef&) = default;
};

/// One FROM item. The first item has no join condition; later items come from
/// `JOIN ... [ON ...]` or a comma.
struct FromItem {
    TableRef table;
    std::optional<Expr> on;
    friend bool operator==(const FromItem&, const FromItem&) = default;
};

struct OrderItem {
    Expr expr;
    bool descending = false;
    friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct Select;

struct UnionPart {
    bool all = false;
    Box<Select> next;
    friend bool operator==(const UnionPart&, const UnionPart&);
};

/// Hierarchical parse tree of one SELECT. For a compound (`a UNION b`) the
/// head holds the trailing ORDER BY / LIMIT / OFFSET, which apply to the
/// whole compound.
struct Select {
    bool distinct = false;
    std::vector<SelectItem> items;
    std::vector<FromItem> from;
    std::optional<Expr> where;
    std::vector<Expr> group_by;
    std::optional<Expr> having;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> limit;
    std::optional<std::int64_t> offset;
    std::optional<UnionPart> union_with;

    friend bool operator==(const Select&, const Select&) = default;
};

inline bool operator==(const InList& a, const InList& b) {
    return a.operand == b.operand && a.items == b.items && a.negated == b.negated;
}
inline bool operator==(const InSubquery& a, const InSubquery& b) {
    return a.operand == b.operand && a.subquery == b.subquery && a.negated == b.negated;
}
inline bool operator==(const ScalarSubquery& a, const ScalarSubquery& b) { return a.subquery == b.subquery; }
inline bool operator==(const UnionPart& a, const UnionPart& b) { return a.all == b.all && a.next == b.next; }

/// Parse tree alias: the tree is a Select.
using SqlParseTree = Select;

/// Canonical SQL text; parse_sql(render_sql(t)) == t.
std::string render_sql(const Select& s);
std::string render_sql(const Expr& e);

/// JSON-izable form keyed by clause keyword (select, from, where, groupby,
/// having, orderby, limit, offset, union).
nlohmann::json to_json(const Select& s);
nlohmann::json to_json(const Expr& e);

/// Visit every Select in the tree (the root, union parts, and nested
/// subqueries), parents before children.
template <class F>
void for_each_select(const Select& s, F&& f);

/// Conjuncts of an AND-tree.
std::vector<const Expr*> conjuncts(const Expr& e);

bool contains_aggregate(const Expr& e);

}  // namespace relkg::sql

#include "relkg/sql_ast_inl.hpp"
