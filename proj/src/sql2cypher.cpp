#include "relkg/sql2cypher.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "relkg/binding.hpp"
#include "relkg/errors.hpp"
#include "relkg/text.hpp"

namespace relkg {

const std::vector<std::pair<std::string_view, std::string_view>>& KeywordMap::entries() {
    static const std::vector<std::pair<std::string_view, std::string_view>> map = {
        {"FROM", "MATCH"},       {"SELECT", "RETURN"},     {"WHERE", "WHERE"},
        {"GROUP BY", "WITH"},    {"HAVING", "WITH WHERE"}, {"ORDER BY", "ORDER BY"},
        {"LIMIT", "LIMIT"},      {"OFFSET", "SKIP"},       {"UNION", "UNION"}};
    return map;
}

std::string_view KeywordMap::cypher_for(std::string_view sql_key) {
    for (const auto& [s, c] : entries()) {
        if (iequals(s, sql_key)) return c;
    }
    return {};
}

namespace {

namespace C = cypher;

[[noreturn]] void untranslatable(const std::string& why) { throw UntranslatableQuery(why); }

std::string_view unqualified(std::string_view name) {
    const auto dot = name.rfind('.');
    return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

C::AggFn map_fn(sql::AggFn fn) {
    switch (fn) {
        case sql::AggFn::Count: return C::AggFn::Count;
        case sql::AggFn::Avg: return C::AggFn::Avg;
        case sql::AggFn::Max: return C::AggFn::Max;
        case sql::AggFn::Min: return C::AggFn::Min;
        case sql::AggFn::Sum: return C::AggFn::Sum;
    }
    return C::AggFn::Count;
}

/// Column references outside any aggregate.
bool has_bare_column(const sql::Expr& e) {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sql::ColumnRef>) {
                return true;
            } else if constexpr (std::is_same_v<T, sql::Comparison> || std::is_same_v<T, sql::And> ||
                                 std::is_same_v<T, sql::Or>) {
                return has_bare_column(*n.lhs) || has_bare_column(*n.rhs);
            } else if constexpr (std::is_same_v<T, sql::Like>) {
                return has_bare_column(*n.operand) || has_bare_column(*n.pattern);
            } else if constexpr (std::is_same_v<T, sql::IsNull> || std::is_same_v<T, sql::Not>) {
                return has_bare_column(*n.operand);
            } else if constexpr (std::is_same_v<T, sql::InList>) {
                return has_bare_column(*n.operand) ||
                       std::any_of(n.items.begin(), n.items.end(), [](const sql::Expr& i) { return has_bare_column(i); });
            } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
                return has_bare_column(*n.operand);
            } else {
                return false;
            }
        },
        e.node);
}

std::string regex_from_like(const std::string& p) {
    std::string out;
    for (char c : p) {
        if (c == '%') {
            out += ".*";
        } else if (c == '_') {
            out += '.';
        } else {
            if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out += '\\';
            out += c;
        }
    }
    return out;
}

C::Expr like_to_cypher(C::Expr operand, const std::string& pattern) {
    auto wildcard_free = [](std::string_view s) { return s.find_first_of("%_") == std::string_view::npos; };
    const std::size_t n = pattern.size();
    auto make = [&](C::StringOp op, std::string text) {
        return C::Expr{C::StringMatch{op, std::move(operand), C::lit(Value::text(std::move(text)))}};
    };
    if (n >= 2 && pattern.front() == '%' && pattern.back() == '%' && wildcard_free(pattern.substr(1, n - 2))) {
        return make(C::StringOp::Contains, pattern.substr(1, n - 2));
    }
    if (n >= 1 && pattern.back() == '%' && wildcard_free(pattern.substr(0, n - 1))) {
        return make(C::StringOp::StartsWith, pattern.substr(0, n - 1));
    }
    if (n >= 1 && pattern.front() == '%' && wildcard_free(pattern.substr(1))) {
        return make(C::StringOp::EndsWith, pattern.substr(1));
    }
    return make(C::StringOp::Regex, regex_from_like(pattern));
}

struct Shared {
    const TableClassification& cls;
    std::set<std::string> reserved;  // every SQL binding name in the tree
    int next_sq = 0;
    std::vector<Provenance>* provenance = nullptr;

    std::string fresh_sq() {
        while (true) {
            std::string name = "sq" + std::to_string(next_sq++);
            if (!reserved.count(name)) return name;
        }
    }
};

void collect_bindings(const sql::Select& root, std::set<std::string>& out) {
    sql::for_each_select(root, [&](const sql::Select& s) {
        for (const auto& f : s.from) out.insert(f.table.binding_name());
    });
}

struct AliasInfo {
    std::string sql_name;
    std::string table;
    const TableClass* cls = nullptr;
    std::string var;
    int node = -1;                 // entity: its pattern node
    std::array<int, 2> ends{-1, -1};  // linking: endpoint pattern nodes
    bool attached[2] = {false, false};
    bool linking() const { return cls->is_linking(); }
};

struct PNode {
    std::string var;
    std::string label;
    bool alias_node = false;
    bool show_label = false;
};

struct PEdge {
    std::string var;
    std::string type;
    int a = -1;
    int b = -1;
};

/// Projection result of one SELECT before it becomes a RETURN or a WITH.
struct Projection {
    std::vector<C::ProjectionItem> items;
    std::vector<std::string> names;
    bool distinct = false;
    std::vector<C::OrderItem> order_by;
};

class SelectTranslator {
public:
    SelectTranslator(Shared& shared, const sql::Select& s, bool top) : sh_(shared), s_(s), top_(top) {}

    /// names: column names forced onto the RETURN (union alignment).
    C::SingleQuery run(const std::vector<std::string>* names, std::vector<std::string>* names_out) {
        bind_aliases();
        absorb_joins();
        std::optional<C::Expr> where = residual_where();
        C::SingleQuery q;
        Projection p = project(q);
        if (names) {
            if (names->size() != p.items.size()) untranslatable("UNION branches differ in arity");
            for (std::size_t i = 0; i < p.items.size(); ++i) {
                if (C::column_name(p.items[i]) != (*names)[i]) p.items[i].alias = (*names)[i];
            }
        } else if (names_out) {
            *names_out = p.names;
        }
        // q.clauses currently holds the grouping WITH, if any.
        std::vector<C::Clause> clauses = std::move(prefix_);
        C::Match m;
        m.patterns = build_paths();
        m.where = std::move(where);
        clauses.emplace_back(std::move(m));
        for (auto& c : q.clauses) clauses.push_back(std::move(c));
        q.clauses = std::move(clauses);
        q.ret.distinct = p.distinct;
        q.ret.items = std::move(p.items);
        q.ret.order_by = std::move(p.order_by);
        q.ret.skip = s_.offset;
        q.ret.limit = s_.limit;
        if (top_) record_provenance();
        return q;
    }

private:
    // ------------------------------------------------------------------
    // Names

    std::string fresh_var(std::string_view label) {
        std::string base(unqualified(label).substr(0, 2));
        base = to_lower(base);
        if (base.empty() || !is_identifier_start(base.front())) base = "n" + base;
        for (char& c : base) {
            if (!is_identifier_char(c)) c = '_';
        }
        std::string name = base;
        for (int k = 2; used_vars_.count(name) || sh_.reserved.count(name); ++k) name = base + std::to_string(k);
        used_vars_.insert(name);
        return name;
    }

    // ------------------------------------------------------------------
    // FROM

    void bind_aliases() {
        std::set<std::string> linking_tables;
        for (const auto& f : s_.from) {
            if (!f.table.alias.empty()) used_vars_.insert(f.table.alias);
        }
        for (const auto& f : s_.from) {
            AliasInfo a;
            a.sql_name = f.table.binding_name();
            a.cls = sh_.cls.find(f.table.name);
            if (!a.cls) throw UnknownSchemaItem(f.table.name);
            a.table = a.cls->table;
            a.var = f.table.alias.empty() ? fresh_var(a.table) : f.table.alias;
            if (a.linking()) {
                if (!linking_tables.insert(to_lower(a.table)).second) {
                    untranslatable("linking table " + a.table + " joined more than once");
                }
                if (iequals(a.cls->foreign_keys[0].referenced_table, a.cls->foreign_keys[1].referenced_table)) {
                    untranslatable("linking table " + a.table + " connects a table to itself");
                }
            } else {
                a.node = static_cast<int>(nodes_.size());
                nodes_.push_back({a.var, a.table, true, true});
            }
            aliases_.push_back(std::move(a));
        }
    }

    AliasInfo* find_alias(std::string_view sql_name) {
        for (auto& a : aliases_) {
            if (iequals(a.sql_name, sql_name)) return &a;
        }
        return nullptr;
    }

    // ------------------------------------------------------------------
    // JOIN conditions -> patterns

    void absorb_joins() {
        for (const auto& f : s_.from) {
            if (!f.on) continue;
            for (const sql::Expr* c : sql::conjuncts(*f.on)) conj_.push_back(c);
        }
        if (s_.where) {
            for (const sql::Expr* c : sql::conjuncts(*s_.where)) conj_.push_back(c);
        }
        absorbed_.assign(conj_.size(), false);

        // Linking endpoints.
        for (auto& l : aliases_) {
            if (!l.linking()) continue;
            for (int k = 0; k < 2; ++k) {
                const ForeignKey& fk = l.cls->foreign_keys[k];
                for (auto& p : aliases_) {
                    if (p.linking() || !iequals(p.table, fk.referenced_table)) continue;
                    auto hits = match_key(l, fk.columns, p, fk.referenced_columns);
                    if (!hits) continue;
                    for (int h : *hits) absorbed_[h] = true;
                    l.ends[k] = p.node;
                    l.attached[k] = true;
                    break;
                }
            }
            for (int k = 0; k < 2; ++k) {
                if (l.attached[k]) continue;
                l.ends[k] = static_cast<int>(nodes_.size());
                nodes_.push_back({"", l.cls->foreign_keys[k].referenced_table, false, false});
            }
            if (!l.attached[0] && !l.attached[1]) nodes_[l.ends[0]].show_label = true;
            edges_.push_back({l.var, l.table, l.ends[0], l.ends[1]});
        }

        // *_HAS_* edges between entity aliases.
        std::set<std::string> has_types;
        for (auto& owner : aliases_) {
            if (owner.linking()) continue;
            for (const auto& fk : owner.cls->foreign_keys) {
                if (iequals(fk.referenced_table, owner.table)) continue;
                const auto same_target = std::count_if(
                    owner.cls->foreign_keys.begin(), owner.cls->foreign_keys.end(),
                    [&](const ForeignKey& o) { return iequals(o.referenced_table, fk.referenced_table); });
                if (same_target != 1) continue;
                const TableClass* target = sh_.cls.find(fk.referenced_table);
                if (!target || target->is_linking()) continue;
                const std::string type = has_edge_type(target->table, owner.table);
                if (has_types.count(type)) continue;
                for (auto& ref : aliases_) {
                    if (&ref == &owner || ref.linking() || !iequals(ref.table, target->table)) continue;
                    auto hits = match_key(owner, fk.columns, ref, fk.referenced_columns);
                    if (!hits) continue;
                    for (int h : *hits) absorbed_[h] = true;
                    edges_.push_back({"", type, ref.node, owner.node});
                    has_types.insert(type);
                    break;
                }
            }
        }
    }

    /// Indices of unabsorbed equality conjuncts x.cols[i] = y.refs[i] for
    /// every i, or nullopt if any pair is missing.
    std::optional<std::vector<int>> match_key(const AliasInfo& x, const std::vector<std::string>& cols,
                                              const AliasInfo& y, const std::vector<std::string>& refs) const {
        std::vector<int> hits;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            int found = -1;
            for (std::size_t c = 0; c < conj_.size() && found < 0; ++c) {
                if (absorbed_[c] || std::find(hits.begin(), hits.end(), static_cast<int>(c)) != hits.end()) continue;
                if (!conj_[c]->is<sql::Comparison>()) continue;
                const auto& cmp = conj_[c]->as<sql::Comparison>();
                if (cmp.op != CompareOp::Eq || !cmp.lhs->is<sql::ColumnRef>() || !cmp.rhs->is<sql::ColumnRef>()) continue;
                const auto& l = cmp.lhs->as<sql::ColumnRef>();
                const auto& r = cmp.rhs->as<sql::ColumnRef>();
                auto is = [](const sql::ColumnRef& ref, const AliasInfo& a, const std::string& col) {
                    return iequals(ref.table, a.sql_name) && iequals(ref.column, col);
                };
                if ((is(l, x, cols[i]) && is(r, y, refs[i])) || (is(r, x, cols[i]) && is(l, y, refs[i]))) {
                    found = static_cast<int>(c);
                }
            }
            if (found < 0) return std::nullopt;
            hits.push_back(found);
        }
        return hits;
    }

    std::vector<C::PatternPath> build_paths() {
        std::vector<bool> used(edges_.size(), false);
        std::vector<bool> seen(nodes_.size(), false);
        auto node_pattern = [&](int n) {
            C::NodePattern p;
            p.var = nodes_[n].var;
            if (!seen[n] && (nodes_[n].show_label || !p.var.empty())) p.label = nodes_[n].label;
            seen[n] = true;
            return p;
        };
        auto next_edge = [&](int cur) -> int {
            for (std::size_t e = 0; e < edges_.size(); ++e) {
                if (!used[e] && (edges_[e].a == cur || edges_[e].b == cur)) return static_cast<int>(e);
            }
            return -1;
        };
        std::vector<C::PatternPath> paths;
        auto walk = [&](int start) {
            C::PatternPath path{node_pattern(start)};
            int cur = start;
            for (int e = next_edge(cur); e >= 0; e = next_edge(cur)) {
                used[e] = true;
                const int other = edges_[e].a == cur ? edges_[e].b : edges_[e].a;
                path.steps.push_back({C::RelPattern{edges_[e].var, edges_[e].type, {}}, node_pattern(other)});
                cur = other;
            }
            paths.push_back(std::move(path));
        };
        for (const auto& a : aliases_) {
            if (a.linking()) continue;
            if (!seen[a.node]) walk(a.node);
            while (next_edge(a.node) >= 0) walk(a.node);
        }
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            if (!used[e]) walk(edges_[e].a);
        }
        return paths;
    }

    // ------------------------------------------------------------------
    // Expressions

    std::string endpoint_var(AliasInfo& l, int slot) {
        PNode& n = nodes_[l.ends[slot]];
        if (n.var.empty()) {
            n.var = fresh_var(n.label);
            n.show_label = true;
        }
        return n.var;
    }

    C::Expr column(const sql::ColumnRef& r) {
        if (r.table.empty()) untranslatable("reference to select alias " + r.column + " outside ORDER BY/HAVING");
        AliasInfo* a = find_alias(r.table);
        if (!a) untranslatable("correlated reference to " + r.table + "." + r.column);
        if (!a->linking()) return C::prop(a->var, r.column);
        for (int k = 0; k < 2; ++k) {
            const ForeignKey& fk = a->cls->foreign_keys[k];
            for (std::size_t i = 0; i < fk.columns.size(); ++i) {
                if (!iequals(fk.columns[i], r.column)) continue;
                // A key column of a linking table is the endpoint's key property.
                const TableClass* target = sh_.cls.find(fk.referenced_table);
                std::string key = fk.referenced_columns[i];
                if (target) {
                    for (const auto& c : target->columns) {
                        if (iequals(c, key)) key = c;
                    }
                }
                return C::prop(endpoint_var(*a, k), key);
            }
        }
        return C::prop(a->var, r.column);
    }

    std::string first_var() const { return aliases_.front().var; }

    C::Expr aggregate(const sql::Aggregate& a, bool star_as_var) {
        C::Aggregate out;
        out.fn = map_fn(a.fn);
        out.distinct = a.distinct;
        if (a.star) {
            if (star_as_var) {
                out.arg = Box<C::Expr>(C::var(first_var()));
            } else {
                out.star = true;
            }
        } else {
            if (contains_aggregate(**a.arg)) untranslatable("nested aggregate");
            out.arg = Box<C::Expr>(expr(**a.arg, nullptr));
        }
        return C::Expr{std::move(out)};
    }

    using Leaf = std::function<std::optional<C::Expr>(const sql::Expr&)>;

    C::Expr expr(const sql::Expr& e, const Leaf* leaf) {
        if (leaf) {
            if (auto hit = (*leaf)(e)) return std::move(*hit);
        }
        return std::visit(
            [&](const auto& n) -> C::Expr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, sql::Literal>) {
                    return C::lit(n.value);
                } else if constexpr (std::is_same_v<T, sql::ColumnRef>) {
                    return column(n);
                } else if constexpr (std::is_same_v<T, sql::Aggregate>) {
                    untranslatable("aggregate outside SELECT/HAVING/ORDER BY");
                } else if constexpr (std::is_same_v<T, sql::Comparison>) {
                    return C::cmp(n.op, expr(*n.lhs, leaf), expr(*n.rhs, leaf));
                } else if constexpr (std::is_same_v<T, sql::Like>) {
                    if (!n.pattern->template is<sql::Literal>()) untranslatable("LIKE with a non-literal pattern");
                    const Value& p = n.pattern->template as<sql::Literal>().value;
                    if (p.is_null()) untranslatable("LIKE NULL");
                    C::Expr m = like_to_cypher(expr(*n.operand, leaf), p.to_display());
                    return n.negated ? C::not_(std::move(m)) : m;
                } else if constexpr (std::is_same_v<T, sql::InList>) {
                    C::ListLiteral list;
                    for (const auto& i : n.items) list.items.push_back(expr(i, leaf));
                    C::Expr in{C::In{expr(*n.operand, leaf), C::Expr{std::move(list)}}};
                    return n.negated ? C::not_(std::move(in)) : in;
                } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
                    return in_subquery(n, leaf);
                } else if constexpr (std::is_same_v<T, sql::ScalarSubquery>) {
                    return scalar_subquery(*n.subquery);
                } else if constexpr (std::is_same_v<T, sql::IsNull>) {
                    return C::Expr{C::IsNull{expr(*n.operand, leaf), n.negated}};
                } else if constexpr (std::is_same_v<T, sql::And>) {
                    return C::and_(expr(*n.lhs, leaf), expr(*n.rhs, leaf));
                } else if constexpr (std::is_same_v<T, sql::Or>) {
                    return C::or_(expr(*n.lhs, leaf), expr(*n.rhs, leaf));
                } else {
                    return C::not_(expr(*n.operand, leaf));
                }
            },
            e.node);
    }

    std::optional<C::Expr> residual_where() {
        std::optional<C::Expr> out;
        for (std::size_t i = 0; i < conj_.size(); ++i) {
            if (absorbed_[i]) continue;
            C::Expr e = expr(*conj_[i], nullptr);
            out = out ? C::and_(std::move(*out), std::move(e)) : std::move(e);
        }
        return out;
    }

    // ------------------------------------------------------------------
    // Subqueries

    static void check_subquery_shape(const sql::Select& inner) {
        if (inner.union_with) untranslatable("UNION inside a subquery");
        if (!inner.order_by.empty() || inner.limit || inner.offset) {
            untranslatable("ORDER BY/LIMIT/OFFSET inside a subquery");
        }
        if (inner.items.size() != 1 || inner.items[0].star) untranslatable("subquery must select one column");
    }

    /// Number of distinct edge types that can join a node of `a` to a node
    /// of `b`; -1 when two keys of b point at a (ambiguous).
    int connecting_types(const TableClass& a, const TableClass& b) const {
        std::set<std::string> types;
        int from_b = 0;
        for (const auto& fk : b.foreign_keys) {
            if (!b.is_linking() && iequals(fk.referenced_table, a.table)) {
                ++from_b;
                types.insert(has_edge_type(a.table, b.table));
            }
        }
        if (from_b > 1) return -1;
        for (const auto& fk : a.foreign_keys) {
            if (iequals(fk.referenced_table, b.table)) types.insert(has_edge_type(b.table, a.table));
        }
        for (const auto& t : sh_.cls.tables) {
            if (!t.is_linking()) continue;
            const auto& f = t.foreign_keys;
            if ((iequals(f[0].referenced_table, a.table) && iequals(f[1].referenced_table, b.table)) ||
                (iequals(f[1].referenced_table, a.table) && iequals(f[0].referenced_table, b.table))) {
                types.insert(t.table);
            }
        }
        return static_cast<int>(types.size());
    }

    /// `NOT IN (SELECT fk FROM T2)` where fk points at the outer column:
    /// a negated edge pattern, or nullopt when the rule does not apply.
    std::optional<C::Expr> negation_pattern(const sql::InSubquery& n) {
        const sql::Select& inner = *n.subquery;
        if (!n.negated || !n.operand->is<sql::ColumnRef>()) return std::nullopt;
        if (inner.from.size() != 1 || inner.where || !inner.group_by.empty() || inner.having) return std::nullopt;
        const auto& item = inner.items[0];
        if (!item.expr || !item.expr->is<sql::ColumnRef>()) return std::nullopt;
        const auto& outer_ref = n.operand->as<sql::ColumnRef>();
        AliasInfo* outer = find_alias(outer_ref.table);
        if (!outer || outer->linking()) return std::nullopt;
        const TableClass* t2 = sh_.cls.find(inner.from[0].table.name);
        if (!t2 || iequals(t2->table, outer->table)) return std::nullopt;
        const std::string& inner_col = item.expr->as<sql::ColumnRef>().column;
        const ForeignKey* key = nullptr;
        for (const auto& fk : t2->foreign_keys) {
            if (fk.columns.size() == 1 && iequals(fk.columns[0], inner_col) &&
                iequals(fk.referenced_table, outer->table) && iequals(fk.referenced_columns[0], outer_ref.column)) {
                key = &fk;
            }
        }
        if (!key) return std::nullopt;
        C::PatternPath path{C::NodePattern{outer->var, outer->table, {}}};
        if (t2->is_linking()) {
            path.steps.push_back({C::RelPattern{"", t2->table, {}}, C::NodePattern{}});
        } else {
            const int types = connecting_types(*outer->cls, *t2);
            if (types < 1) return std::nullopt;
            C::RelPattern rel;
            if (types > 1) rel.type = has_edge_type(outer->table, t2->table);
            path.steps.push_back({rel, C::NodePattern{"", t2->table, {}}});
        }
        note("WHERE", "WHERE NOT pattern");
        return C::not_(C::Expr{C::PatternPredicate{std::move(path)}});
    }

    void claim_prefix() {
        if (has_prefix_) untranslatable("more than one subquery in one SELECT");
        has_prefix_ = true;
    }

    /// Translate an inner SELECT and append it to the prefix; returns the
    /// inner query's RETURN for the caller to turn into a WITH.
    C::Return inner_query(const sql::Select& inner) {
        SelectTranslator t(sh_, inner, false);
        C::SingleQuery q = t.run(nullptr, nullptr);
        for (auto& c : q.clauses) prefix_.push_back(std::move(c));
        return std::move(q.ret);
    }

    C::Expr in_subquery(const sql::InSubquery& n, const Leaf* leaf) {
        check_subquery_shape(*n.subquery);
        if (auto neg = negation_pattern(n)) return std::move(*neg);
        claim_prefix();
        C::Return r = inner_query(*n.subquery);
        const std::string name = sh_.fresh_sq();
        C::Expr item = std::move(r.items[0].expr);
        if (C::contains_aggregate(item)) {
            prefix_.emplace_back(C::With{false, {C::ProjectionItem{std::move(item), name}}, std::nullopt});
            item = C::var(name);
        }
        C::Aggregate collect{C::AggFn::Collect};
        collect.arg = Box<C::Expr>(std::move(item));
        prefix_.emplace_back(C::With{false, {C::ProjectionItem{C::Expr{std::move(collect)}, name}}, std::nullopt});
        note("WHERE", "WITH collect");
        sq_vars_.insert(name);
        C::Expr in{C::In{expr(*n.operand, leaf), C::var(name)}};
        return n.negated ? C::not_(std::move(in)) : in;
    }

    C::Expr scalar_subquery(const sql::Select& inner) {
        check_subquery_shape(inner);
        const auto& item = inner.items[0];
        if (!item.expr || !sql::contains_aggregate(*item.expr) || !inner.group_by.empty() || inner.having ||
            has_bare_column(*item.expr)) {
            untranslatable("scalar subquery must be a single ungrouped aggregate");
        }
        claim_prefix();
        C::Return r = inner_query(inner);
        const std::string name = sh_.fresh_sq();
        prefix_.emplace_back(C::With{false, {C::ProjectionItem{std::move(r.items[0].expr), name}}, std::nullopt});
        note("WHERE", "WITH");
        sq_vars_.insert(name);
        return C::var(name);
    }

    // ------------------------------------------------------------------
    // Projection

    static std::string base_name(const sql::SelectItem& item) {
        if (!item.alias.empty()) return item.alias;
        if (item.expr && item.expr->is<sql::ColumnRef>()) return item.expr->as<sql::ColumnRef>().column;
        if (item.expr && item.expr->is<sql::Aggregate>()) {
            return std::string(sql::to_string(item.expr->as<sql::Aggregate>().fn));
        }
        return "expr";
    }

    static std::string unique_name(std::string base, std::vector<std::string>& taken) {
        std::string name = base;
        for (int k = 2; std::find(taken.begin(), taken.end(), name) != taken.end(); ++k) name = base + std::to_string(k);
        taken.push_back(name);
        return name;
    }

    std::vector<sql::SelectItem> expanded_items() const {
        std::vector<sql::SelectItem> out;
        for (const auto& item : s_.items) {
            if (!item.star) {
                out.push_back(item);
                continue;
            }
            for (const auto& a : aliases_) {
                for (const auto& c : a.cls->columns) {
                    out.push_back(sql::SelectItem{false, sql::Expr{sql::ColumnRef{a.sql_name, c}}, ""});
                }
            }
        }
        return out;
    }

    std::optional<std::size_t> order_position(const sql::Expr& e, std::size_t count) const {
        if (!e.is<sql::Literal>()) return std::nullopt;
        const Value& v = e.as<sql::Literal>().value;
        if (v.kind() != ValueKind::Integer) return std::nullopt;
        if (v.as_integer() < 1 || static_cast<std::size_t>(v.as_integer()) > count) {
            untranslatable("ORDER BY position out of range");
        }
        return static_cast<std::size_t>(v.as_integer() - 1);
    }

    Projection project(C::SingleQuery& q) {
        const auto items = expanded_items();
        bool any_agg = false;
        for (const auto& i : items) any_agg = any_agg || sql::contains_aggregate(*i.expr);
        bool order_agg = false;
        for (const auto& o : s_.order_by) order_agg = order_agg || sql::contains_aggregate(o.expr);
        if (!s_.group_by.empty() || s_.having || order_agg) return grouped(items, q);
        if (any_agg) return aggregated(items);
        return plain(items);
    }

    Projection plain(const std::vector<sql::SelectItem>& items) {
        Projection p;
        p.distinct = s_.distinct;
        std::vector<std::string> taken;
        for (const auto& i : items) {
            p.items.push_back({expr(*i.expr, nullptr), i.alias});
            p.names.push_back(unique_name(base_name(i), taken));
        }
        for (const auto& o : s_.order_by) {
            C::Expr e = [&]() -> C::Expr {
                if (auto pos = order_position(o.expr, items.size())) return p.items[*pos].expr;
                if (o.expr.is<sql::ColumnRef>() && o.expr.as<sql::ColumnRef>().table.empty()) {
                    const auto& name = o.expr.as<sql::ColumnRef>().column;
                    for (const auto& i : p.items) {
                        if (iequals(i.alias, name)) return C::var(i.alias);
                    }
                    untranslatable("unknown ORDER BY alias " + name);
                }
                return expr(o.expr, nullptr);
            }();
            if (p.distinct) {
                const bool projected = std::any_of(p.items.begin(), p.items.end(), [&](const C::ProjectionItem& i) {
                    return i.expr == e || (e.is<C::Variable>() && e.as<C::Variable>().name == i.alias);
                });
                if (!projected) untranslatable("DISTINCT with ORDER BY on an unselected expression");
            }
            p.order_by.push_back({std::move(e), o.descending});
        }
        return p;
    }

    Projection aggregated(const std::vector<sql::SelectItem>& items) {
        Projection p;
        p.distinct = s_.distinct;
        std::vector<std::string> taken;
        for (const auto& i : items) {
            if (has_bare_column(*i.expr)) untranslatable("column outside an aggregate without GROUP BY");
            p.items.push_back({aggregate_expr(*i.expr), i.alias});
            p.names.push_back(unique_name(base_name(i), taken));
        }
        for (const auto& o : s_.order_by) {
            if (auto pos = order_position(o.expr, items.size())) {
                p.order_by.push_back({p.items[*pos].expr, o.descending});
            } else if (o.expr.is<sql::ColumnRef>() && o.expr.as<sql::ColumnRef>().table.empty()) {
                p.order_by.push_back({C::var(o.expr.as<sql::ColumnRef>().column), o.descending});
            } else {
                p.order_by.push_back({expr(o.expr, nullptr), o.descending});
            }
        }
        return p;
    }

    /// Aggregate-only SELECT item in a RETURN: count(*) counts the first
    /// pattern variable.
    C::Expr aggregate_expr(const sql::Expr& e) {
        Leaf leaf = [&](const sql::Expr& x) -> std::optional<C::Expr> {
            if (x.is<sql::Aggregate>()) return aggregate(x.as<sql::Aggregate>(), true);
            return std::nullopt;
        };
        return expr(e, &leaf);
    }

    Projection grouped(const std::vector<sql::SelectItem>& items, C::SingleQuery& q) {
        std::vector<C::Expr> keys;
        std::vector<const sql::ColumnRef*> key_refs;
        for (const auto& g : s_.group_by) {
            if (!g.is<sql::ColumnRef>() || g.as<sql::ColumnRef>().table.empty()) {
                untranslatable("GROUP BY on something other than a column");
            }
            key_refs.push_back(&g.as<sql::ColumnRef>());
            keys.push_back(column(g.as<sql::ColumnRef>()));
        }
        // Group keys plus every column an equality conjunct ties to one.
        std::vector<sql::ColumnRef> fixed;
        for (const auto* k : key_refs) fixed.push_back(*k);
        auto is_fixed = [&](const sql::ColumnRef& r) {
            return std::any_of(fixed.begin(), fixed.end(), [&](const sql::ColumnRef& f) {
                return iequals(f.table, r.table) && iequals(f.column, r.column);
            });
        };
        for (bool grew = true; grew;) {
            grew = false;
            for (const sql::Expr* c : conj_) {
                if (!c->is<sql::Comparison>()) continue;
                const auto& cmp = c->as<sql::Comparison>();
                if (cmp.op != CompareOp::Eq || !cmp.lhs->is<sql::ColumnRef>() || !cmp.rhs->is<sql::ColumnRef>()) continue;
                const auto& l = cmp.lhs->as<sql::ColumnRef>();
                const auto& r = cmp.rhs->as<sql::ColumnRef>();
                if (is_fixed(l) != is_fixed(r)) {
                    fixed.push_back(is_fixed(l) ? r : l);
                    grew = true;
                }
            }
        }
        auto determined = [&](const sql::ColumnRef& r) {
            // Bare columns are fine when the group keys fix their table's key.
            const AliasInfo* a = find_alias(r.table);
            if (!a || a->linking() || a->cls->primary_key.empty()) return false;
            return std::all_of(a->cls->primary_key.begin(), a->cls->primary_key.end(), [&](const std::string& pk) {
                return is_fixed(sql::ColumnRef{r.table, pk});
            });
        };

        std::vector<C::ProjectionItem> with_items;
        std::vector<std::string> taken;
        Projection p;
        p.distinct = s_.distinct;
        for (const auto& i : items) {
            const sql::Expr& e = *i.expr;
            C::Expr ce;
            if (e.is<sql::ColumnRef>()) {
                ce = column(e.as<sql::ColumnRef>());
                const bool is_key = std::find(keys.begin(), keys.end(), ce) != keys.end();
                if (!is_key && !determined(e.as<sql::ColumnRef>())) {
                    untranslatable("selected column is neither grouped nor determined by the group key");
                }
            } else if (e.is<sql::Aggregate>()) {
                ce = aggregate(e.as<sql::Aggregate>(), false);
            } else if (e.is<sql::Literal>()) {
                ce = C::lit(e.as<sql::Literal>().value);
            } else {
                untranslatable("unsupported expression in a grouped SELECT");
            }
            const std::string name = unique_name(base_name(i), taken);
            with_items.push_back({std::move(ce), name});
            p.names.push_back(name);
        }
        for (std::size_t k = 0; k < keys.size(); ++k) {
            const bool present = std::any_of(with_items.begin(), with_items.end(),
                                              [&](const C::ProjectionItem& w) { return w.expr == keys[k]; });
            if (!present) with_items.push_back({keys[k], unique_name(key_refs[k]->column, taken)});
        }

        Leaf leaf = [&](const sql::Expr& x) -> std::optional<C::Expr> {
            if (x.is<sql::Aggregate>()) {
                C::Expr a = aggregate(x.as<sql::Aggregate>(), false);
                for (const auto& w : with_items) {
                    if (w.expr == a) return C::var(w.alias);
                }
                const std::string name =
                    unique_name(std::string(sql::to_string(x.as<sql::Aggregate>().fn)), taken);
                with_items.push_back({std::move(a), name});
                return C::var(name);
            }
            if (x.is<sql::ColumnRef>()) {
                const auto& r = x.as<sql::ColumnRef>();
                if (r.table.empty()) {
                    for (std::size_t i = 0; i < items.size(); ++i) {
                        if (iequals(items[i].alias, r.column)) return C::var(p.names[i]);
                    }
                    untranslatable("unknown alias " + r.column);
                }
                C::Expr c = column(r);
                for (const auto& w : with_items) {
                    if (w.expr == c) return C::var(w.alias);
                }
                untranslatable("HAVING/ORDER BY column " + r.column + " is not grouped");
            }
            return std::nullopt;
        };

        std::optional<C::Expr> having;
        if (s_.having) {
            const std::size_t before = sq_vars_.size();
            having = expr(*s_.having, &leaf);
            if (sq_vars_.size() != before) {
                // The subquery list must survive the grouping WITH as a key.
                if (keys.empty()) untranslatable("HAVING subquery without GROUP BY");
                for (const auto& v : sq_vars_) with_items.insert(with_items.begin(), {C::var(v), ""});
            }
        }
        for (const auto& o : s_.order_by) {
            C::Expr e = [&]() -> C::Expr {
                if (auto pos = order_position(o.expr, items.size())) return C::var(p.names[*pos]);
                return expr(o.expr, &leaf);
            }();
            if (p.distinct) {
                const bool projected = e.is<C::Variable>() && std::find(p.names.begin(), p.names.end(),
                                                                        e.as<C::Variable>().name) != p.names.end();
                if (!projected) untranslatable("DISTINCT with ORDER BY on an unselected expression");
            }
            p.order_by.push_back({std::move(e), o.descending});
        }
        for (const auto& n : p.names) p.items.push_back({C::var(n), ""});
        q.clauses.emplace_back(C::With{false, std::move(with_items), std::move(having)});
        return p;
    }

    // ------------------------------------------------------------------
    // Provenance

    void note(const std::string& sql_key, const std::string& clause) {
        if (top_ && sh_.provenance) sh_.provenance->push_back({sql_key, clause});
    }

    void record_provenance() {
        note("FROM", "MATCH");
        if (s_.where) {
            const bool residual = std::any_of(absorbed_.begin() + static_cast<std::ptrdiff_t>(on_count()),
                                              absorbed_.end(), [](bool b) { return !b; });
            note("WHERE", residual ? "WHERE" : "MATCH");
        }
        note("SELECT", "RETURN");
        if (!s_.group_by.empty()) note("GROUP BY", "WITH");
        if (s_.having) note("HAVING", "WITH WHERE");
        if (!s_.order_by.empty()) note("ORDER BY", "ORDER BY");
        if (s_.limit) note("LIMIT", "LIMIT");
        if (s_.offset) note("OFFSET", "SKIP");
    }

    std::size_t on_count() const {
        std::size_t n = 0;
        for (const auto& f : s_.from) {
            if (f.on) n += sql::conjuncts(*f.on).size();
        }
        return n;
    }

    Shared& sh_;
    const sql::Select& s_;
    bool top_;
    std::vector<AliasInfo> aliases_;
    std::vector<PNode> nodes_;
    std::vector<PEdge> edges_;
    std::vector<const sql::Expr*> conj_;
    std::vector<bool> absorbed_;
    std::set<std::string> used_vars_;
    std::set<std::string> sq_vars_;
    std::vector<C::Clause> prefix_;
    bool has_prefix_ = false;
};

}  // namespace

Translation translate_with_provenance(const sql::Select& tree, const TableClassification& cls) {
    const sql::Select bound = normalize_identifiers(tree, SchemaBinding::from_classification(cls));
    Translation out;
    Shared sh{cls};
    collect_bindings(bound, sh.reserved);
    sh.provenance = &out.provenance;

    std::vector<const sql::Select*> parts{&bound};
    std::vector<bool> all;
    for (const sql::Select* s = &bound; s->union_with; s = &*s->union_with->next) {
        all.push_back(s->union_with->all);
        parts.push_back(&*s->union_with->next);
    }
    if (parts.size() > 1 && (!bound.order_by.empty() || bound.limit || bound.offset)) {
        untranslatable("ORDER BY/LIMIT/OFFSET over a UNION");
    }
    // Branches are translated on copies without their union tail.
    std::vector<std::string> names;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        sql::Select branch = *parts[i];
        branch.union_with.reset();
        SelectTranslator t(sh, branch, i == 0);
        if (i == 0) {
            out.query.parts.push_back(t.run(nullptr, parts.size() > 1 ? &names : nullptr));
            if (parts.size() > 1) {
                auto& items = out.query.parts[0].ret.items;
                for (std::size_t k = 0; k < items.size(); ++k) {
                    if (C::column_name(items[k]) != names[k]) items[k].alias = names[k];
                }
            }
        } else {
            out.query.parts.push_back(t.run(&names, nullptr));
        }
    }
    out.query.union_all = std::move(all);
    if (parts.size() > 1) out.provenance.push_back({"UNION", "UNION"});
    return out;
}

cypher::CypherQuery translate(const sql::Select& tree, const TableClassification& cls) {
    return translate_with_provenance(tree, cls).query;
}

}  // namespace relkg
