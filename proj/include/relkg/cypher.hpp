#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/box.hpp"
#include "relkg/value.hpp"

namespace relkg::cypher {

using PropertyList = std::vector<std::pair<std::string, Value>>;

/// `(var:Label {k: v})`; every part optional.
struct NodePattern {
    std::string var;
    std::string label;
    PropertyList props;
    friend bool operator==(const NodePattern&, const NodePattern&) = default;
};

/// `-[var:Type {k: v}]-`, always undirected.
struct RelPattern {
    std::string var;
    std::string type;
    PropertyList props;
    friend bool operator==(const RelPattern&, const RelPattern&) = default;
};

struct PathStep {
    RelPattern rel;
    NodePattern node;
    friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct PatternPath {
    NodePattern start;
    std::vector<PathStep> steps;
    friend bool operator==(const PatternPath&, const PatternPath&) = default;
};

enum class AggFn { Count, Avg, Max, Min, Sum, Collect };
enum class StringOp { Contains, StartsWith, EndsWith, Regex };

std::string_view to_string(AggFn fn);

struct Expr;

struct Literal {
    Value value;
    friend bool operator==(const Literal&, const Literal&) = default;
};
struct Variable {
    std::string name;
    friend bool operator==(const Variable&, const Variable&) = default;
};
struct Property {
    std::string var;
    std::string key;
    friend bool operator==(const Property&, const Property&) = default;
};
struct ListLiteral {
    std::vector<Expr> items;
    friend bool operator==(const ListLiteral&, const ListLiteral&);
};
struct Aggregate {
    AggFn fn = AggFn::Count;
    bool distinct = false;
    bool star = false;  // count(*)
    std::optional<Box<Expr>> arg;
    friend bool operator==(const Aggregate&, const Aggregate&) = default;
};
struct Comparison {
    CompareOp op = CompareOp::Eq;
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};
struct StringMatch {
    StringOp op = StringOp::Contains;
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const StringMatch&, const StringMatch&) = default;
};
/// `x IN list`.
struct In {
    Box<Expr> operand;
    Box<Expr> list;
    friend bool operator==(const In&, const In&) = default;
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
/// A pattern used as a boolean: true iff at least one match exists given
/// the current bindings.
struct PatternPredicate {
    PatternPath path;
    friend bool operator==(const PatternPredicate&, const PatternPredicate&) = default;
};

struct Expr {
    using Node = std::variant<Literal, Variable, Property, ListLiteral, Aggregate, Comparison, StringMatch, In,
                              IsNull, And, Or, Not, PatternPredicate>;
    Node node;

    template <class T>
    bool is() const { return std::holds_alternative<T>(node); }
    template <class T>
    const T& as() const { return std::get<T>(node); }

    friend bool operator==(const Expr&, const Expr&) = default;
};

inline bool operator==(const ListLiteral& a, const ListLiteral& b) { return a.items == b.items; }

/// `expr [AS alias]`. The column name is the alias, or the rendered
/// expression when there is none.
struct ProjectionItem {
    Expr expr;
    std::string alias;
    friend bool operator==(const ProjectionItem&, const ProjectionItem&) = default;
};

struct OrderItem {
    Expr expr;
    bool descending = false;
    friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct Match {
    std::vector<PatternPath> patterns;
    std::optional<Expr> where;
    friend bool operator==(const Match&, const Match&) = default;
};

struct With {
    bool distinct = false;
    std::vector<ProjectionItem> items;
    std::optional<Expr> where;
    friend bool operator==(const With&, const With&) = default;
};

using Clause = std::variant<Match, With>;

struct Return {
    bool distinct = false;
    std::vector<ProjectionItem> items;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> skip;
    std::optional<std::int64_t> limit;
    friend bool operator==(const Return&, const Return&) = default;
};

struct SingleQuery {
    std::vector<Clause> clauses;
    Return ret;
    friend bool operator==(const SingleQuery&, const SingleQuery&) = default;
};

/// parts[0] UNION[ALL] parts[1] ...; union_all[i] joins parts[i] and parts[i+1].
struct CypherQuery {
    std::vector<SingleQuery> parts;
    std::vector<bool> union_all;
    friend bool operator==(const CypherQuery&, const CypherQuery&) = default;
};

std::string render_cypher(const CypherQuery& q);
std::string render_expr(const Expr& e);
std::string render_pattern(const PatternPath& p);
/// Column name of a projection item.
std::string column_name(const ProjectionItem& item);
/// Backtick a name unless it is a plain identifier.
std::string quote_name(std::string_view name);

/// Parse the subset produced by render_cypher (plus lowercase keywords,
/// either SKIP/LIMIT order, and `!=` for `<>`). Throws ParseError.
CypherQuery parse_cypher(std::string_view text);

bool contains_aggregate(const Expr& e);

nlohmann::json to_json(const Expr& e);
nlohmann::json to_json(const CypherQuery& q);

// Expression builders used by the translator and tests.
Expr lit(Value v);
Expr var(std::string name);
Expr prop(std::string var, std::string key);
Expr cmp(CompareOp op, Expr lhs, Expr rhs);
Expr and_(Expr lhs, Expr rhs);
Expr or_(Expr lhs, Expr rhs);
Expr not_(Expr operand);

}  // namespace relkg::cypher
