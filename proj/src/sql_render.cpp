#include "relkg/sql_ast.hpp"
#include "relkg/text.hpp"

namespace relkg::sql {

std::string_view to_string(AggFn fn) {
    switch (fn) {
        case AggFn::Count: return "count";
        case AggFn::Avg: return "avg";
        case AggFn::Max: return "max";
        case AggFn::Min: return "min";
        case AggFn::Sum: return "sum";
    }
    return "";
}

namespace {

const char* op_text(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

const char* op_json(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "eq";
        case CompareOp::Ne: return "neq";
        case CompareOp::Lt: return "lt";
        case CompareOp::Le: return "lte";
        case CompareOp::Gt: return "gt";
        case CompareOp::Ge: return "gte";
    }
    return "eq";
}

std::string ident(const std::string& name) {
    static const char* reserved[] = {"select", "from", "where", "group", "by", "having", "order", "limit",
                                     "offset", "union", "all", "join", "inner", "on", "as", "and", "or",
                                     "not", "in", "like", "between", "is", "null", "distinct", "asc",
                                     "desc", "left", "right", "outer", "cross", "full", "natural", "using",
                                     "except", "intersect", "case", "when", "then", "else", "end", "exists"};
    bool needs_quote = !is_plain_identifier(name);
    for (const char* r : reserved) {
        if (iequals(name, r)) needs_quote = true;
    }
    if (!needs_quote) return name;
    std::string out = "`";
    for (char c : name) {
        if (c == '`') out += '`';
        out += c;
    }
    return out + "`";
}

// Precedence: OR 1, AND 2, NOT 3, predicate 4, operand 5.
int precedence(const Expr& e) {
    if (e.is<Or>()) return 1;
    if (e.is<And>()) return 2;
    if (e.is<Not>()) return 3;
    if (e.is<Comparison>() || e.is<Like>() || e.is<InList>() || e.is<InSubquery>() || e.is<IsNull>()) return 4;
    return 5;
}

std::string render(const Expr& e, int min_prec);

std::string render_select(const Select& s);

std::string render_node(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return n.value.to_sql_literal();
            } else if constexpr (std::is_same_v<T, ColumnRef>) {
                return n.table.empty() ? ident(n.column) : ident(n.table) + "." + ident(n.column);
            } else if constexpr (std::is_same_v<T, Aggregate>) {
                std::string out(to_string(n.fn));
                out += '(';
                if (n.star) {
                    out += '*';
                } else {
                    if (n.distinct) out += "DISTINCT ";
                    out += render(**n.arg, 1);
                }
                return out + ')';
            } else if constexpr (std::is_same_v<T, Comparison>) {
                return render(*n.lhs, 5) + " " + op_text(n.op) + " " + render(*n.rhs, 5);
            } else if constexpr (std::is_same_v<T, Like>) {
                return render(*n.operand, 5) + (n.negated ? " NOT LIKE " : " LIKE ") + render(*n.pattern, 5);
            } else if constexpr (std::is_same_v<T, InList>) {
                std::string out = render(*n.operand, 5) + (n.negated ? " NOT IN (" : " IN (");
                for (std::size_t i = 0; i < n.items.size(); ++i) {
                    if (i) out += ", ";
                    out += render(n.items[i], 5);
                }
                return out + ")";
            } else if constexpr (std::is_same_v<T, InSubquery>) {
                return render(*n.operand, 5) + (n.negated ? " NOT IN (" : " IN (") + render_select(*n.subquery) + ")";
            } else if constexpr (std::is_same_v<T, ScalarSubquery>) {
                return "(" + render_select(*n.subquery) + ")";
            } else if constexpr (std::is_same_v<T, IsNull>) {
                return render(*n.operand, 5) + (n.negated ? " IS NOT NULL" : " IS NULL");
            } else if constexpr (std::is_same_v<T, And>) {
                return render(*n.lhs, 2) + " AND " + render(*n.rhs, 3);
            } else if constexpr (std::is_same_v<T, Or>) {
                return render(*n.lhs, 1) + " OR " + render(*n.rhs, 2);
            } else {
                static_assert(std::is_same_v<T, Not>);
                return "NOT " + render(*n.operand, 3);
            }
        },
        e.node);
}

std::string render(const Expr& e, int min_prec) {
    std::string body = render_node(e);
    if (precedence(e) < min_prec) return "(" + body + ")";
    return body;
}

std::string render_core(const Select& s) {
    std::string out = "SELECT ";
    if (s.distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (i) out += ", ";
        const auto& item = s.items[i];
        if (item.star) {
            out += "*";
        } else {
            out += render(*item.expr, 1);
            if (!item.alias.empty()) out += " AS " + ident(item.alias);
        }
    }
    out += " FROM ";
    for (std::size_t i = 0; i < s.from.size(); ++i) {
        const auto& f = s.from[i];
        if (i) out += " JOIN ";
        out += ident(f.table.name);
        if (!f.table.alias.empty()) out += " AS " + ident(f.table.alias);
        if (f.on) out += " ON " + render(*f.on, 1);
    }
    if (s.where) out += " WHERE " + render(*s.where, 1);
    if (!s.group_by.empty()) {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < s.group_by.size(); ++i) {
            if (i) out += ", ";
            out += render(s.group_by[i], 1);
        }
    }
    if (s.having) out += " HAVING " + render(*s.having, 1);
    return out;
}

std::string render_select(const Select& s) {
    std::string out = render_core(s);
    for (const Select* part = &s; part->union_with; part = &*part->union_with->next) {
        out += part->union_with->all ? " UNION ALL " : " UNION ";
        out += render_core(*part->union_with->next);
    }
    if (!s.order_by.empty()) {
        out += " ORDER BY ";
        for (std::size_t i = 0; i < s.order_by.size(); ++i) {
            if (i) out += ", ";
            out += render(s.order_by[i].expr, 1);
            if (s.order_by[i].descending) out += " DESC";
        }
    }
    if (s.limit) out += " LIMIT " + std::to_string(*s.limit);
    if (s.offset) out += " OFFSET " + std::to_string(*s.offset);
    return out;
}

nlohmann::json value_json(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return nullptr;
        case ValueKind::Integer: return v.as_integer();
        case ValueKind::Float: return v.as_float();
        case ValueKind::Text: return nlohmann::json{{"literal", v.as_text()}};
    }
    return nullptr;
}

nlohmann::json core_json(const Select& s) {
    using nlohmann::json;
    json out = json::object();
    json items = json::array();
    for (const auto& item : s.items) {
        if (item.star) {
            items.push_back("*");
            continue;
        }
        json entry{{"value", to_json(*item.expr)}};
        if (!item.alias.empty()) entry["name"] = item.alias;
        items.push_back(std::move(entry));
    }
    out[s.distinct ? "select_distinct" : "select"] = std::move(items);
    json from = json::array();
    for (std::size_t i = 0; i < s.from.size(); ++i) {
        const auto& f = s.from[i];
        json table{{"value", f.table.name}};
        if (!f.table.alias.empty()) table["name"] = f.table.alias;
        if (i == 0) {
            from.push_back(std::move(table));
        } else {
            json join{{"join", std::move(table)}};
            if (f.on) join["on"] = to_json(*f.on);
            from.push_back(std::move(join));
        }
    }
    out["from"] = std::move(from);
    if (s.where) out["where"] = to_json(*s.where);
    if (!s.group_by.empty()) {
        json g = json::array();
        for (const auto& e : s.group_by) g.push_back(json{{"value", to_json(e)}});
        out["groupby"] = std::move(g);
    }
    if (s.having) out["having"] = to_json(*s.having);
    return out;
}

}  // namespace

std::string render_sql(const Select& s) { return render_select(s); }
std::string render_sql(const Expr& e) { return render(e, 1); }

nlohmann::json to_json(const Expr& e) {
    using nlohmann::json;
    return std::visit(
        [&](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return value_json(n.value);
            } else if constexpr (std::is_same_v<T, ColumnRef>) {
                return n.table.empty() ? n.column : n.table + "." + n.column;
            } else if constexpr (std::is_same_v<T, Aggregate>) {
                json arg = n.star ? json("*") : to_json(**n.arg);
                if (n.distinct) arg = json{{"distinct", arg}};
                return json{{std::string(to_string(n.fn)), arg}};
            } else if constexpr (std::is_same_v<T, Comparison>) {
                return json{{op_json(n.op), json::array({to_json(*n.lhs), to_json(*n.rhs)})}};
            } else if constexpr (std::is_same_v<T, Like>) {
                return json{{n.negated ? "nlike" : "like", json::array({to_json(*n.operand), to_json(*n.pattern)})}};
            } else if constexpr (std::is_same_v<T, InList>) {
                json items = json::array();
                for (const auto& i : n.items) items.push_back(to_json(i));
                return json{{n.negated ? "nin" : "in", json::array({to_json(*n.operand), items})}};
            } else if constexpr (std::is_same_v<T, InSubquery>) {
                return json{{n.negated ? "nin" : "in", json::array({to_json(*n.operand), to_json(*n.subquery)})}};
            } else if constexpr (std::is_same_v<T, ScalarSubquery>) {
                return to_json(*n.subquery);
            } else if constexpr (std::is_same_v<T, IsNull>) {
                return json{{n.negated ? "exists" : "missing", to_json(*n.operand)}};
            } else if constexpr (std::is_same_v<T, And>) {
                return json{{"and", json::array({to_json(*n.lhs), to_json(*n.rhs)})}};
            } else if constexpr (std::is_same_v<T, Or>) {
                return json{{"or", json::array({to_json(*n.lhs), to_json(*n.rhs)})}};
            } else {
                return json{{"not", to_json(*n.operand)}};
            }
        },
        e.node);
}

nlohmann::json to_json(const Select& s) {
    using nlohmann::json;
    json out;
    if (s.union_with) {
        const char* key = s.union_with->all ? "union_all" : "union";
        json parts = json::array();
        for (const Select* part = &s; part; part = part->union_with ? &*part->union_with->next : nullptr) {
            parts.push_back(core_json(*part));
        }
        out = json{{key, std::move(parts)}};
    } else {
        out = core_json(s);
    }
    if (!s.order_by.empty()) {
        json o = json::array();
        for (const auto& item : s.order_by) {
            json entry{{"value", to_json(item.expr)}};
            if (item.descending) entry["sort"] = "desc";
            o.push_back(std::move(entry));
        }
        out["orderby"] = std::move(o);
    }
    if (s.limit) out["limit"] = *s.limit;
    if (s.offset) out["offset"] = *s.offset;
    return out;
}

std::vector<const Expr*> conjuncts(const Expr& e) {
    std::vector<const Expr*> out;
    if (e.is<And>()) {
        const auto& a = e.as<And>();
        for (const Expr* c : conjuncts(*a.lhs)) out.push_back(c);
        for (const Expr* c : conjuncts(*a.rhs)) out.push_back(c);
    } else {
        out.push_back(&e);
    }
    return out;
}

bool contains_aggregate(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Aggregate>) {
                return true;
            } else if constexpr (std::is_same_v<T, Comparison> || std::is_same_v<T, And> || std::is_same_v<T, Or>) {
                return contains_aggregate(*n.lhs) || contains_aggregate(*n.rhs);
            } else if constexpr (std::is_same_v<T, Like>) {
                return contains_aggregate(*n.operand) || contains_aggregate(*n.pattern);
            } else if constexpr (std::is_same_v<T, InList>) {
                if (contains_aggregate(*n.operand)) return true;
                for (const auto& i : n.items) {
                    if (contains_aggregate(i)) return true;
                }
                return false;
            } else if constexpr (std::is_same_v<T, InSubquery>) {
                return contains_aggregate(*n.operand);
            } else if constexpr (std::is_same_v<T, IsNull> || std::is_same_v<T, Not>) {
                return contains_aggregate(*n.operand);
            } else {
                return false;
            }
        },
        e.node);
}

}  // namespace relkg::sql
