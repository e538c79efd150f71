#include "relkg/binding.hpp"

#include <algorithm>
#include <set>

#include "relkg/errors.hpp"
#include "relkg/text.hpp"

namespace relkg {

SchemaBinding SchemaBinding::from_database(const RelationalDatabase& db) {
    SchemaBinding b;
    for (const auto& t : db.tables) b.add_table(t.name, t.column_names());
    return b;
}

SchemaBinding SchemaBinding::from_classification(const TableClassification& cls) {
    SchemaBinding b;
    for (const auto& t : cls.tables) b.add_table(t.table, t.columns);
    return b;
}

SchemaBinding SchemaBinding::from_graph(const PropertyGraph& g) {
    const GraphStats s = graph_stats(g);
    SchemaBinding b;
    for (const auto& [label, keys] : s.label_keys) b.add_table(label, {keys.begin(), keys.end()});
    for (const auto& [type, keys] : s.type_keys) b.add_table(type, {keys.begin(), keys.end()});
    return b;
}

void SchemaBinding::add_table(std::string name, std::vector<std::string> columns) {
    tables_.push_back({std::move(name), std::move(columns)});
}

namespace {

template <class Range, class Get>
auto find_name(const Range& range, std::string_view name, Get get) -> decltype(&*range.begin()) {
    decltype(&*range.begin()) folded = nullptr;
    std::size_t folded_hits = 0;
    for (const auto& item : range) {
        const std::string& candidate = get(item);
        if (candidate == name) return &item;
        if (iequals(candidate, name)) {
            folded = &item;
            ++folded_hits;
        }
    }
    return folded_hits == 1 ? folded : nullptr;
}

}  // namespace

const SchemaBinding::TableEntry* SchemaBinding::find_table(std::string_view name) const {
    return find_name(tables_, name, [](const TableEntry& t) -> const std::string& { return t.name; });
}

std::optional<std::string> SchemaBinding::find_column(const TableEntry& table, std::string_view column) const {
    const std::string* hit = find_name(table.columns, column, [](const std::string& c) -> const std::string& { return c; });
    if (!hit) return std::nullopt;
    return *hit;
}

namespace {

// `domain.table` bindings also answer to the bare table name, so queries
// keep working after namespacing.
std::string_view unqualified(std::string_view name) {
    const auto dot = name.rfind('.');
    return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

struct Scope {
    std::vector<std::pair<std::string, const SchemaBinding::TableEntry*>> items;
    const Scope* parent = nullptr;
};

class Normalizer {
public:
    explicit Normalizer(const SchemaBinding& b) : binding_(b) {}

    void select(sql::Select& s, const Scope* parent) {
        Scope scope;
        scope.parent = parent;
        std::set<std::string> seen;
        for (auto& f : s.from) {
            const auto* t = binding_.find_table(f.table.name);
            if (!t) throw UnknownSchemaItem(f.table.name);
            f.table.name = t->name;
            if (!seen.insert(to_lower(f.table.binding_name())).second) {
                throw UnknownSchemaItem("duplicate table binding " + f.table.binding_name());
            }
            scope.items.emplace_back(f.table.binding_name(), t);
        }
        std::vector<std::string> aliases;
        for (const auto& item : s.items) {
            if (!item.alias.empty()) aliases.push_back(item.alias);
        }
        aliases_ = &aliases;
        for (auto& item : s.items) {
            if (item.expr) expr(*item.expr, scope, false);
        }
        for (auto& f : s.from) {
            if (f.on) expr(*f.on, scope, false);
        }
        if (s.where) expr(*s.where, scope, false);
        for (auto& g : s.group_by) expr(g, scope, false);
        if (s.having) expr(*s.having, scope, false);
        for (auto& o : s.order_by) expr(o.expr, scope, true);
        aliases_ = nullptr;
        if (s.union_with) select(*s.union_with->next, parent);
    }

private:
    std::optional<std::string> alias_match(std::string_view name) const {
        if (!aliases_) return std::nullopt;
        for (const auto& a : *aliases_) {
            if (iequals(a, name)) return a;
        }
        return std::nullopt;
    }

    void column(sql::ColumnRef& ref, const Scope& scope, bool prefer_alias) {
        if (!ref.table.empty()) {
            for (const Scope* sc = &scope; sc; sc = sc->parent) {
                for (const auto& [name, table] : sc->items) {
                    if (!iequals(name, ref.table) && !iequals(unqualified(name), ref.table)) continue;
                    auto col = binding_.find_column(*table, ref.column);
                    if (!col) throw UnknownSchemaItem(ref.table + "." + ref.column);
                    ref.table = name;
                    ref.column = *col;
                    return;
                }
            }
            throw UnknownSchemaItem(ref.table);
        }
        if (prefer_alias) {
            if (auto a = alias_match(ref.column)) {
                ref.column = *a;
                return;
            }
        }
        for (const Scope* sc = &scope; sc; sc = sc->parent) {
            const std::pair<std::string, const SchemaBinding::TableEntry*>* hit = nullptr;
            std::string col;
            for (const auto& item : sc->items) {
                if (auto c = binding_.find_column(*item.second, ref.column)) {
                    if (hit) throw UnknownSchemaItem("ambiguous column " + ref.column);
                    hit = &item;
                    col = *c;
                }
            }
            if (hit) {
                ref.table = hit->first;
                ref.column = col;
                return;
            }
            if (sc == &scope) {
                if (auto a = alias_match(ref.column)) {
                    ref.column = *a;
                    return;
                }
            }
        }
        throw UnknownSchemaItem(ref.column);
    }

    void expr(sql::Expr& e, const Scope& scope, bool prefer_alias) {
        std::visit(
            [&](auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, sql::ColumnRef>) {
                    column(n, scope, prefer_alias);
                } else if constexpr (std::is_same_v<T, sql::Aggregate>) {
                    if (n.arg) expr(**n.arg, scope, false);
                } else if constexpr (std::is_same_v<T, sql::Comparison> || std::is_same_v<T, sql::And> ||
                                     std::is_same_v<T, sql::Or>) {
                    expr(*n.lhs, scope, prefer_alias);
                    expr(*n.rhs, scope, prefer_alias);
                } else if constexpr (std::is_same_v<T, sql::Like>) {
                    expr(*n.operand, scope, prefer_alias);
                    expr(*n.pattern, scope, prefer_alias);
                } else if constexpr (std::is_same_v<T, sql::InList>) {
                    expr(*n.operand, scope, prefer_alias);
                    for (auto& i : n.items) expr(i, scope, prefer_alias);
                } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
                    expr(*n.operand, scope, prefer_alias);
                    nested(*n.subquery, scope);
                } else if constexpr (std::is_same_v<T, sql::ScalarSubquery>) {
                    nested(*n.subquery, scope);
                } else if constexpr (std::is_same_v<T, sql::IsNull> || std::is_same_v<T, sql::Not>) {
                    expr(*n.operand, scope, prefer_alias);
                }
            },
            e.node);
    }

    void nested(sql::Select& s, const Scope& scope) {
        const auto* saved = aliases_;
        select(s, &scope);
        aliases_ = saved;
    }

    const SchemaBinding& binding_;
    const std::vector<std::string>* aliases_ = nullptr;
};

void rename_in(sql::Select& s, const std::vector<std::pair<std::string, std::string>>& renames);

void rename_expr(sql::Expr& e, const std::vector<std::pair<std::string, std::string>>& renames) {
    std::visit(
        [&](auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sql::InSubquery>) {
                rename_expr(*n.operand, renames);
                rename_in(*n.subquery, renames);
            } else if constexpr (std::is_same_v<T, sql::ScalarSubquery>) {
                rename_in(*n.subquery, renames);
            } else if constexpr (std::is_same_v<T, sql::Comparison> || std::is_same_v<T, sql::And> ||
                                 std::is_same_v<T, sql::Or>) {
                rename_expr(*n.lhs, renames);
                rename_expr(*n.rhs, renames);
            } else if constexpr (std::is_same_v<T, sql::Like>) {
                rename_expr(*n.operand, renames);
                rename_expr(*n.pattern, renames);
            } else if constexpr (std::is_same_v<T, sql::InList>) {
                rename_expr(*n.operand, renames);
                for (auto& i : n.items) rename_expr(i, renames);
            } else if constexpr (std::is_same_v<T, sql::IsNull> || std::is_same_v<T, sql::Not>) {
                rename_expr(*n.operand, renames);
            }
        },
        e.node);
}

void rename_in(sql::Select& s, const std::vector<std::pair<std::string, std::string>>& renames) {
    for (auto& f : s.from) {
        for (const auto& [from, to] : renames) {
            if (!iequals(f.table.name, from)) continue;
            f.table.name = to;
            break;
        }
    }
    for (auto& item : s.items) {
        if (item.expr) rename_expr(*item.expr, renames);
    }
    for (auto& f : s.from) {
        if (f.on) rename_expr(*f.on, renames);
    }
    if (s.where) rename_expr(*s.where, renames);
    if (s.having) rename_expr(*s.having, renames);
    if (s.union_with) rename_in(*s.union_with->next, renames);
}

}  // namespace

sql::Select normalize_identifiers(sql::Select tree, const SchemaBinding& binding) {
    Normalizer(binding).select(tree, nullptr);
    return tree;
}

sql::Select rename_tables(sql::Select tree, const std::vector<std::pair<std::string, std::string>>& renames) {
    rename_in(tree, renames);
    return tree;
}

}  // namespace relkg
