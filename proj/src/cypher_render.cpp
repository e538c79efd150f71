#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>

#include "relkg/cypher.hpp"
#include "relkg/graph.hpp"
#include "relkg/text.hpp"

namespace relkg::cypher {

std::string_view to_string(AggFn fn) {
    switch (fn) {
        case AggFn::Count: return "count";
        case AggFn::Avg: return "avg";
        case AggFn::Max: return "max";
        case AggFn::Min: return "min";
        case AggFn::Sum: return "sum";
        case AggFn::Collect: return "collect";
    }
    return "";
}

namespace {

constexpr std::array<std::string_view, 25> kReserved = {
    "match", "where", "with",     "distinct", "return", "order", "by",   "desc",  "asc",
    "skip",  "limit", "union",    "all",      "and",    "or",    "not",  "in",    "is",
    "null",  "as",    "contains", "starts",   "ends",   "true",  "false"};

int precedence(const Expr& e) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Or>) return 1;
            if constexpr (std::is_same_v<T, And>) return 2;
            if constexpr (std::is_same_v<T, Not>) return 3;
            if constexpr (std::is_same_v<T, Comparison> || std::is_same_v<T, StringMatch> ||
                          std::is_same_v<T, In> || std::is_same_v<T, IsNull>) {
                return 4;
            }
            return 5;
        },
        e.node);
}

std::string render_at(const Expr& e, int min_prec);

std::string render_props(const PropertyList& props) {
    if (props.empty()) return {};
    std::string out = " {";
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (i) out += ", ";
        out += quote_name(props[i].first) + ": " + props[i].second.to_cypher_literal();
    }
    return out + "}";
}

std::string render_node(const NodePattern& n) {
    std::string out = "(" + (n.var.empty() ? std::string() : quote_name(n.var));
    if (!n.label.empty()) out += ":" + quote_name(n.label);
    std::string props = render_props(n.props);
    if (n.var.empty() && n.label.empty() && !props.empty()) props.erase(0, 1);
    return out + props + ")";
}

std::string render_rel(const RelPattern& r) {
    std::string out = "-[" + (r.var.empty() ? std::string() : quote_name(r.var));
    if (!r.type.empty()) out += ":" + quote_name(r.type);
    std::string props = render_props(r.props);
    if (r.var.empty() && r.type.empty() && !props.empty()) props.erase(0, 1);
    return out + props + "]-";
}

std::string_view op_text(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "<>";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

std::string_view string_op_text(StringOp op) {
    switch (op) {
        case StringOp::Contains: return "CONTAINS";
        case StringOp::StartsWith: return "STARTS WITH";
        case StringOp::EndsWith: return "ENDS WITH";
        case StringOp::Regex: return "=~";
    }
    return "";
}

std::string render_node_expr(const Expr& e) {
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return n.value.to_cypher_literal();
            } else if constexpr (std::is_same_v<T, Variable>) {
                return quote_name(n.name);
            } else if constexpr (std::is_same_v<T, Property>) {
                return quote_name(n.var) + "." + quote_name(n.key);
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                std::string out = "[";
                for (std::size_t i = 0; i < n.items.size(); ++i) {
                    if (i) out += ", ";
                    out += render_at(n.items[i], 1);
                }
                return out + "]";
            } else if constexpr (std::is_same_v<T, Aggregate>) {
                std::string out(to_string(n.fn));
                out += "(";
                if (n.distinct) out += "DISTINCT ";
                out += n.star ? "*" : render_at(**n.arg, 1);
                return out + ")";
            } else if constexpr (std::is_same_v<T, Comparison>) {
                return render_at(*n.lhs, 5) + " " + std::string(op_text(n.op)) + " " + render_at(*n.rhs, 5);
            } else if constexpr (std::is_same_v<T, StringMatch>) {
                return render_at(*n.lhs, 5) + " " + std::string(string_op_text(n.op)) + " " + render_at(*n.rhs, 5);
            } else if constexpr (std::is_same_v<T, In>) {
                return render_at(*n.operand, 5) + " IN " + render_at(*n.list, 5);
            } else if constexpr (std::is_same_v<T, IsNull>) {
                return render_at(*n.operand, 5) + (n.negated ? " IS NOT NULL" : " IS NULL");
            } else if constexpr (std::is_same_v<T, And>) {
                return render_at(*n.lhs, 2) + " AND " + render_at(*n.rhs, 3);
            } else if constexpr (std::is_same_v<T, Or>) {
                return render_at(*n.lhs, 1) + " OR " + render_at(*n.rhs, 2);
            } else if constexpr (std::is_same_v<T, Not>) {
                return "NOT " + render_at(*n.operand, 3);
            } else {
                return render_pattern(n.path);
            }
        },
        e.node);
}

std::string render_at(const Expr& e, int min_prec) {
    std::string s = render_node_expr(e);
    return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string render_items(const std::vector<ProjectionItem>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += render_at(items[i].expr, 1);
        if (!items[i].alias.empty()) out += " AS " + quote_name(items[i].alias);
    }
    return out;
}

std::string render_single(const SingleQuery& q) {
    std::vector<std::string> parts;
    for (const auto& c : q.clauses) {
        if (const auto* m = std::get_if<Match>(&c)) {
            std::string s = "MATCH ";
            for (std::size_t i = 0; i < m->patterns.size(); ++i) {
                if (i) s += ", ";
                s += render_pattern(m->patterns[i]);
            }
            if (m->where) s += " WHERE " + render_at(*m->where, 1);
            parts.push_back(std::move(s));
        } else {
            const auto& w = std::get<With>(c);
            std::string s = "WITH ";
            if (w.distinct) s += "DISTINCT ";
            s += render_items(w.items);
            if (w.where) s += " WHERE " + render_at(*w.where, 1);
            parts.push_back(std::move(s));
        }
    }
    std::string r = "RETURN ";
    if (q.ret.distinct) r += "DISTINCT ";
    r += render_items(q.ret.items);
    if (!q.ret.order_by.empty()) {
        r += " ORDER BY ";
        for (std::size_t i = 0; i < q.ret.order_by.size(); ++i) {
            if (i) r += ", ";
            r += render_at(q.ret.order_by[i].expr, 1);
            if (q.ret.order_by[i].descending) r += " DESC";
        }
    }
    if (q.ret.skip) r += " SKIP " + std::to_string(*q.ret.skip);
    if (q.ret.limit) r += " LIMIT " + std::to_string(*q.ret.limit);
    parts.push_back(std::move(r));
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ' ';
        out += parts[i];
    }
    return out;
}

}  // namespace

std::string quote_name(std::string_view name) {
    const bool reserved = std::any_of(kReserved.begin(), kReserved.end(),
                                      [&](std::string_view k) { return iequals(k, name); });
    if (is_plain_identifier(name) && !reserved) return std::string(name);
    std::string out = "`";
    for (char c : name) {
        if (c == '`') out += '`';
        out += c;
    }
    return out + "`";
}

std::string render_pattern(const PatternPath& p) {
    std::string out = render_node(p.start);
    for (const auto& s : p.steps) out += render_rel(s.rel) + render_node(s.node);
    return out;
}

std::string render_expr(const Expr& e) { return render_at(e, 1); }

std::string column_name(const ProjectionItem& item) {
    return item.alias.empty() ? render_expr(item.expr) : item.alias;
}

std::string render_cypher(const CypherQuery& q) {
    std::string out;
    for (std::size_t i = 0; i < q.parts.size(); ++i) {
        if (i) out += q.union_all[i - 1] ? " UNION ALL " : " UNION ";
        out += render_single(q.parts[i]);
    }
    return out;
}

bool contains_aggregate(const Expr& e) {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Aggregate>) {
                return true;
            } else if constexpr (std::is_same_v<T, Comparison> || std::is_same_v<T, StringMatch> ||
                                 std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                return contains_aggregate(*n.lhs) || contains_aggregate(*n.rhs);
            } else if constexpr (std::is_same_v<T, In>) {
                return contains_aggregate(*n.operand) || contains_aggregate(*n.list);
            } else if constexpr (std::is_same_v<T, IsNull> || std::is_same_v<T, Not>) {
                return contains_aggregate(*n.operand);
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                return std::any_of(n.items.begin(), n.items.end(), [](const Expr& i) { return contains_aggregate(i); });
            } else {
                return false;
            }
        },
        e.node);
}

Expr lit(Value v) { return Expr{Literal{std::move(v)}}; }
Expr var(std::string name) { return Expr{Variable{std::move(name)}}; }
Expr prop(std::string v, std::string key) { return Expr{Property{std::move(v), std::move(key)}}; }
Expr cmp(CompareOp op, Expr lhs, Expr rhs) { return Expr{Comparison{op, std::move(lhs), std::move(rhs)}}; }
Expr and_(Expr lhs, Expr rhs) { return Expr{And{std::move(lhs), std::move(rhs)}}; }
Expr or_(Expr lhs, Expr rhs) { return Expr{Or{std::move(lhs), std::move(rhs)}}; }
Expr not_(Expr operand) { return Expr{Not{std::move(operand)}}; }


namespace {

using nlohmann::json;

json props_json(const PropertyList& props) {
    json out = json::object();
    for (const auto& [k, v] : props) out[k] = value_to_json(v);
    return out;
}

json path_json(const PatternPath& p) {
    auto node = [](const NodePattern& n) {
        return json{{"var", n.var}, {"label", n.label}, {"props", props_json(n.props)}};
    };
    json steps = json::array();
    for (const auto& st : p.steps) {
        steps.push_back(json{{"rel", {{"var", st.rel.var}, {"type", st.rel.type}, {"props", props_json(st.rel.props)}}},
                             {"node", node(st.node)}});
    }
    return json{{"start", node(p.start)}, {"steps", std::move(steps)}};
}

json items_json(const std::vector<ProjectionItem>& items) {
    json out = json::array();
    for (const auto& it : items) {
        json e{{"value", to_json(it.expr)}};
        if (!it.alias.empty()) e["name"] = it.alias;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

nlohmann::json to_json(const Expr& e) {
    return std::visit(
        [](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return json{{"literal", value_to_json(n.value)}};
            } else if constexpr (std::is_same_v<T, Variable>) {
                return json{{"var", n.name}};
            } else if constexpr (std::is_same_v<T, Property>) {
                return json{{"property", {n.var, n.key}}};
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                json items = json::array();
                for (const auto& i : n.items) items.push_back(to_json(i));
                return json{{"list", std::move(items)}};
            } else if constexpr (std::is_same_v<T, Aggregate>) {
                json arg = n.star ? json("*") : to_json(**n.arg);
                if (n.distinct) arg = json{{"distinct", arg}};
                return json{{std::string(to_string(n.fn)), arg}};
            } else if constexpr (std::is_same_v<T, Comparison>) {
                return json{{std::string(op_text(n.op)), {to_json(*n.lhs), to_json(*n.rhs)}}};
            } else if constexpr (std::is_same_v<T, StringMatch>) {
                return json{{std::string(string_op_text(n.op)), {to_json(*n.lhs), to_json(*n.rhs)}}};
            } else if constexpr (std::is_same_v<T, In>) {
                return json{{"in", {to_json(*n.operand), to_json(*n.list)}}};
            } else if constexpr (std::is_same_v<T, IsNull>) {
                return json{{n.negated ? "is_not_null" : "is_null", to_json(*n.operand)}};
            } else if constexpr (std::is_same_v<T, And>) {
                return json{{"and", {to_json(*n.lhs), to_json(*n.rhs)}}};
            } else if constexpr (std::is_same_v<T, Or>) {
                return json{{"or", {to_json(*n.lhs), to_json(*n.rhs)}}};
            } else if constexpr (std::is_same_v<T, Not>) {
                return json{{"not", to_json(*n.operand)}};
            } else {
                return json{{"pattern", path_json(n.path)}};
            }
        },
        e.node);
}

nlohmann::json to_json(const CypherQuery& q) {
    json parts = json::array();
    for (const auto& part : q.parts) {
        json clauses = json::array();
        for (const auto& c : part.clauses) {
            if (const auto* m = std::get_if<Match>(&c)) {
                json pats = json::array();
                for (const auto& p : m->patterns) pats.push_back(path_json(p));
                json j{{"match", std::move(pats)}};
                if (m->where) j["where"] = to_json(*m->where);
                clauses.push_back(std::move(j));
            } else {
                const auto& w = std::get<With>(c);
                json j{{"with", items_json(w.items)}};
                if (w.distinct) j["distinct"] = true;
                if (w.where) j["where"] = to_json(*w.where);
                clauses.push_back(std::move(j));
            }
        }
        json ret{{"items", items_json(part.ret.items)}};
        if (part.ret.distinct) ret["distinct"] = true;
        if (!part.ret.order_by.empty()) {
            json order = json::array();
            for (const auto& o : part.ret.order_by) {
                order.push_back(json{{"value", to_json(o.expr)}, {"desc", o.descending}});
            }
            ret["order_by"] = std::move(order);
        }
        if (part.ret.skip) ret["skip"] = *part.ret.skip;
        if (part.ret.limit) ret["limit"] = *part.ret.limit;
        parts.push_back(json{{"clauses", std::move(clauses)}, {"return", std::move(ret)}});
    }
    json out{{"parts", std::move(parts)}};
    if (!q.union_all.empty()) out["union_all"] = q.union_all;
    return out;
}

}  // namespace relkg::cypher
