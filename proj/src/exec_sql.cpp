#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "agg.hpp"
#include "relkg/binding.hpp"
#include "relkg/errors.hpp"
#include "relkg/exec.hpp"
#include "relkg/text.hpp"

namespace relkg {

namespace {

struct Source {
    std::string binding;
    const Table* table;
};

using Tuple = std::vector<const Row*>;

struct Frame {
    const std::vector<Source>* sources = nullptr;
    /// Current row; for a group, its first row (null for an empty group).
    const Tuple* tuple = nullptr;
    const std::vector<Tuple>* group = nullptr;
    const sql::Select* select = nullptr;
    const Frame* outer = nullptr;
};

detail::Agg to_agg(sql::AggFn fn) {
    switch (fn) {
        case sql::AggFn::Count: return detail::Agg::Count;
        case sql::AggFn::Avg: return detail::Agg::Avg;
        case sql::AggFn::Max: return detail::Agg::Max;
        case sql::AggFn::Min: return detail::Agg::Min;
        case sql::AggFn::Sum: return detail::Agg::Sum;
    }
    return detail::Agg::Count;
}

Value truth(std::optional<bool> b) { return b ? Value::integer(*b ? 1 : 0) : Value::null(); }

/// Whether a subquery reads columns of an enclosing query.
bool correlated(const sql::Select& s, std::vector<std::set<std::string>>& scopes);

bool expr_correlated(const sql::Expr& e, std::vector<std::set<std::string>>& scopes) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sql::ColumnRef>) {
                if (n.table.empty()) return false;
                // Only the innermost scopes (the subquery's own) count as local.
                return !scopes.back().count(to_lower(n.table)) &&
                       std::none_of(scopes.begin() + 1, scopes.end(),
                                    [&](const std::set<std::string>& sc) { return sc.count(to_lower(n.table)) > 0; });
            } else if constexpr (std::is_same_v<T, sql::Aggregate>) {
                return n.arg && expr_correlated(**n.arg, scopes);
            } else if constexpr (std::is_same_v<T, sql::Comparison> || std::is_same_v<T, sql::And> ||
                                 std::is_same_v<T, sql::Or>) {
                return expr_correlated(*n.lhs, scopes) || expr_correlated(*n.rhs, scopes);
            } else if constexpr (std::is_same_v<T, sql::Like>) {
                return expr_correlated(*n.operand, scopes) || expr_correlated(*n.pattern, scopes);
            } else if constexpr (std::is_same_v<T, sql::InList>) {
                if (expr_correlated(*n.operand, scopes)) return true;
                for (const auto& i : n.items) {
                    if (expr_correlated(i, scopes)) return true;
                }
                return false;
            } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
                return expr_correlated(*n.operand, scopes) || correlated(*n.subquery, scopes);
            } else if constexpr (std::is_same_v<T, sql::ScalarSubquery>) {
                return correlated(*n.subquery, scopes);
            } else if constexpr (std::is_same_v<T, sql::IsNull> || std::is_same_v<T, sql::Not>) {
                return expr_correlated(*n.operand, scopes);
            } else {
                return false;
            }
        },
        e.node);
}

bool correlated(const sql::Select& s, std::vector<std::set<std::string>>& scopes) {
    std::set<std::string> local;
    for (const auto& f : s.from) local.insert(to_lower(f.table.binding_name()));
    scopes.push_back(std::move(local));
    bool hit = false;
    auto check = [&](const sql::Expr& e) { hit = hit || expr_correlated(e, scopes); };
    for (const auto& i : s.items) {
        if (i.expr) check(*i.expr);
    }
    for (const auto& f : s.from) {
        if (f.on) check(*f.on);
    }
    if (s.where) check(*s.where);
    for (const auto& g : s.group_by) check(g);
    if (s.having) check(*s.having);
    for (const auto& o : s.order_by) check(o.expr);
    scopes.pop_back();
    if (s.union_with) hit = hit || correlated(*s.union_with->next, scopes);
    return hit;
}

bool is_correlated(const sql::Select& s) {
    // scopes[0] is a sentinel for "outside"; the subquery's scopes follow.
    std::vector<std::set<std::string>> scopes{{}};
    return correlated(s, scopes);
}

std::string column_label(const sql::SelectItem& item) {
    if (!item.alias.empty()) return item.alias;
    if (item.expr->is<sql::ColumnRef>()) return item.expr->as<sql::ColumnRef>().column;
    return sql::render_sql(*item.expr);
}

struct Sorted {
    std::vector<Row> rows;
    bool ties = false;
};

/// Stable sort of rows by parallel key vectors; nulls sort first.
Sorted sort_rows(std::vector<Row> rows, std::vector<Row> keys, const std::vector<bool>& descending) {
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto cmp = [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < descending.size(); ++k) {
            const auto c = keys[a][k] <=> keys[b][k];
            if (c != 0) return descending[k] ? c > 0 : c < 0;
        }
        return false;
    };
    std::stable_sort(idx.begin(), idx.end(), cmp);
    Sorted out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i > 0 && keys[idx[i]] == keys[idx[i - 1]] && rows[idx[i]] != rows[idx[i - 1]]) out.ties = true;
        out.rows.push_back(std::move(rows[idx[i]]));
    }
    return out;
}

void apply_window(std::vector<Row>& rows, std::optional<std::int64_t> offset, std::optional<std::int64_t> limit) {
    const std::size_t skip = offset && *offset > 0 ? static_cast<std::size_t>(*offset) : 0;
    if (skip >= rows.size()) {
        rows.clear();
    } else {
        rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(skip));
    }
    if (limit && *limit >= 0 && static_cast<std::size_t>(*limit) < rows.size()) {
        rows.resize(static_cast<std::size_t>(*limit));
    }
}

class SqlExec {
public:
    explicit SqlExec(const RelationalDatabase& db) : db_(db) {}

    ResultSet run(const sql::Select& s, const Frame* outer) {
        if (!s.union_with) return single(s, outer, false);
        ResultSet out = single(s, outer, true);
        bool all = s.union_with->all;
        for (const sql::Select* part = &*s.union_with->next;; part = &*part->union_with->next) {
            ResultSet next = single(*part, outer, true);
            if (next.columns.size() != out.columns.size()) throw ExecError("UNION branches differ in arity");
            out.rows.insert(out.rows.end(), next.rows.begin(), next.rows.end());
            if (!all) out.rows = dedup(std::move(out.rows));
            if (!part->union_with) break;
            all = part->union_with->all;
        }
        if (!s.order_by.empty()) {
            std::vector<Row> keys;
            std::vector<bool> desc;
            for (const auto& o : s.order_by) desc.push_back(o.descending);
            for (const auto& row : out.rows) {
                Row key;
                for (const auto& o : s.order_by) key.push_back(row[output_position(o.expr, out.columns)]);
                keys.push_back(std::move(key));
            }
            Sorted sorted = sort_rows(std::move(out.rows), std::move(keys), desc);
            out.rows = std::move(sorted.rows);
            out.has_ties = sorted.ties;
            out.ordered = true;
        }
        apply_window(out.rows, s.offset, s.limit);
        return out;
    }

private:
    static std::vector<Row> dedup(std::vector<Row> rows) {
        std::set<Row> seen;
        std::vector<Row> out;
        for (auto& r : rows) {
            if (seen.insert(r).second) out.push_back(std::move(r));
        }
        return out;
    }

    static std::size_t output_position(const sql::Expr& e, const std::vector<std::string>& columns) {
        if (e.is<sql::Literal>() && e.as<sql::Literal>().value.kind() == ValueKind::Integer) {
            const auto k = e.as<sql::Literal>().value.as_integer();
            if (k < 1 || static_cast<std::size_t>(k) > columns.size()) throw ExecError("ORDER BY position out of range");
            return static_cast<std::size_t>(k - 1);
        }
        if (e.is<sql::ColumnRef>()) {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (iequals(columns[i], e.as<sql::ColumnRef>().column)) return i;
            }
        }
        throw ExecError("ORDER BY term of a UNION must name an output column");
    }

    std::vector<Tuple> from(const sql::Select& s, std::vector<Source>& sources, const Frame* outer) {
        std::vector<Tuple> tuples{Tuple{}};
        for (const auto& f : s.from) {
            const Table* t = db_.find_table(f.table.name);
            if (!t) throw ExecError("unknown table " + f.table.name);
            sources.push_back({f.table.binding_name(), t});
            const std::size_t self = sources.size() - 1;

            // Hash lookup on the first `new.col = earlier.col` conjunct of ON.
            std::optional<std::pair<std::size_t, std::size_t>> probe;  // (source, column) of the earlier side
            std::unordered_map<Value, std::vector<std::size_t>, ValueHash> index;
            if (f.on) {
                for (const sql::Expr* c : sql::conjuncts(*f.on)) {
                    if (probe || !c->is<sql::Comparison>()) continue;
                    const auto& cmp = c->as<sql::Comparison>();
                    if (cmp.op != CompareOp::Eq || !cmp.lhs->is<sql::ColumnRef>() || !cmp.rhs->is<sql::ColumnRef>()) continue;
                    const auto* l = &cmp.lhs->as<sql::ColumnRef>();
                    const auto* r = &cmp.rhs->as<sql::ColumnRef>();
                    if (!iequals(l->table, sources[self].binding)) std::swap(l, r);
                    if (!iequals(l->table, sources[self].binding)) continue;
                    for (std::size_t i = 0; i < self; ++i) {
                        if (!iequals(sources[i].binding, r->table)) continue;
                        const auto mine = t->column_index(l->column);
                        const auto theirs = sources[i].table->column_index(r->column);
                        if (!mine || !theirs) break;
                        probe = {i, *theirs};
                        for (std::size_t row = 0; row < t->rows.size(); ++row) {
                            const Value& v = t->rows[row][*mine];
                            if (!v.is_null()) index[v].push_back(row);
                        }
                    }
                }
            }

            std::vector<Tuple> next;
            std::vector<std::size_t> all(t->rows.size());
            std::iota(all.begin(), all.end(), 0);
            static const std::vector<std::size_t> none;
            for (const auto& tuple : tuples) {
                const std::vector<std::size_t>* rows = &all;
                if (probe) {
                    const Value& v = (*tuple[probe->first])[probe->second];
                    auto it = v.is_null() ? index.end() : index.find(v);
                    rows = it == index.end() ? &none : &it->second;
                }
                for (std::size_t row : *rows) {
                    Tuple nt = tuple;
                    nt.push_back(&t->rows[row]);
                    if (f.on) {
                        Frame fr{&sources, &nt, nullptr, &s, outer};
                        if (pred(*f.on, fr) != true) continue;
                    }
                    next.push_back(std::move(nt));
                }
            }
            tuples = std::move(next);
        }
        return tuples;
    }

    ResultSet single(const sql::Select& s, const Frame* outer, bool compound_part) {
        std::vector<Source> sources;
        std::vector<Tuple> tuples = from(s, sources, outer);
        if (s.where) {
            std::vector<Tuple> kept;
            for (auto& t : tuples) {
                Frame fr{&sources, &t, nullptr, &s, outer};
                if (pred(*s.where, fr) == true) kept.push_back(std::move(t));
            }
            tuples = std::move(kept);
        }

        std::vector<sql::SelectItem> items;
        for (const auto& i : s.items) {
            if (!i.star) {
                items.push_back(i);
                continue;
            }
            for (const auto& src : sources) {
                for (const auto& c : src.table->columns) {
                    items.push_back({false, sql::Expr{sql::ColumnRef{src.binding, c.name}}, ""});
                }
            }
        }
        const bool use_order = !compound_part && !s.order_by.empty();
        bool grouped = !s.group_by.empty() || s.having;
        for (const auto& i : items) grouped = grouped || sql::contains_aggregate(*i.expr);
        if (use_order) {
            for (const auto& o : s.order_by) grouped = grouped || sql::contains_aggregate(o.expr);
        }

        ResultSet out;
        for (const auto& i : items) out.columns.push_back(column_label(i));
        std::vector<Row> keys;

        auto emit = [&](const Frame& fr) {
            Row row;
            for (const auto& i : items) row.push_back(eval(*i.expr, fr));
            if (use_order) {
                Row key;
                for (const auto& o : s.order_by) key.push_back(order_key(o.expr, items, row, fr));
                keys.push_back(std::move(key));
            }
            out.rows.push_back(std::move(row));
        };

        if (grouped) {
            std::vector<std::vector<Tuple>> groups;
            if (s.group_by.empty()) {
                groups.push_back(std::move(tuples));
            } else {
                std::map<Row, std::size_t> by_key;
                for (auto& t : tuples) {
                    Frame fr{&sources, &t, nullptr, &s, outer};
                    Row key;
                    for (const auto& g : s.group_by) key.push_back(eval(g, fr));
                    auto [it, fresh] = by_key.emplace(std::move(key), groups.size());
                    if (fresh) groups.emplace_back();
                    groups[it->second].push_back(std::move(t));
                }
                // Groups come out in key order, as a sort-based GROUP BY does.
                std::vector<std::vector<Tuple>> ordered;
                for (auto& [key, idx] : by_key) ordered.push_back(std::move(groups[idx]));
                groups = std::move(ordered);
            }
            for (const auto& g : groups) {
                Frame fr{&sources, g.empty() ? nullptr : &g.front(), &g, &s, outer};
                if (s.having && pred(*s.having, fr) != true) continue;
                emit(fr);
            }
        } else {
            for (const auto& t : tuples) emit(Frame{&sources, &t, nullptr, &s, outer});
        }

        if (s.distinct) {
            std::set<Row> seen;
            std::vector<Row> rows, kept_keys;
            for (std::size_t i = 0; i < out.rows.size(); ++i) {
                if (!seen.insert(out.rows[i]).second) continue;
                rows.push_back(std::move(out.rows[i]));
                if (use_order) kept_keys.push_back(std::move(keys[i]));
            }
            out.rows = std::move(rows);
            keys = std::move(kept_keys);
        }
        if (use_order) {
            std::vector<bool> desc;
            for (const auto& o : s.order_by) desc.push_back(o.descending);
            Sorted sorted = sort_rows(std::move(out.rows), std::move(keys), desc);
            out.rows = std::move(sorted.rows);
            out.has_ties = sorted.ties;
            out.ordered = true;
        }
        if (!compound_part) apply_window(out.rows, s.offset, s.limit);
        return out;
    }

    Value order_key(const sql::Expr& e, const std::vector<sql::SelectItem>& items, const Row& row, const Frame& fr) {
        if (e.is<sql::Literal>() && e.as<sql::Literal>().value.kind() == ValueKind::Integer) {
            const auto k = e.as<sql::Literal>().value.as_integer();
            if (k < 1 || static_cast<std::size_t>(k) > items.size()) throw ExecError("ORDER BY position out of range");
            return row[static_cast<std::size_t>(k - 1)];
        }
        if (e.is<sql::ColumnRef>() && e.as<sql::ColumnRef>().table.empty()) {
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (iequals(items[i].alias, e.as<sql::ColumnRef>().column)) return row[i];
            }
        }
        return eval(e, fr);
    }

    Value column(const sql::ColumnRef& r, const Frame& f) {
        if (r.table.empty()) {
            if (f.select) {
                for (const auto& i : f.select->items) {
                    if (i.expr && iequals(i.alias, r.column)) return eval(*i.expr, f);
                }
            }
            throw ExecError("unbound column " + r.column);
        }
        for (const Frame* fr = &f; fr; fr = fr->outer) {
            for (std::size_t i = 0; i < fr->sources->size(); ++i) {
                const Source& src = (*fr->sources)[i];
                if (!iequals(src.binding, r.table)) continue;
                const auto idx = src.table->column_index(r.column);
                if (!idx) throw ExecError("unknown column " + r.table + "." + r.column);
                if (!fr->tuple) return Value::null();
                return (*(*fr->tuple)[i])[*idx];
            }
        }
        throw ExecError("unbound table " + r.table);
    }

    Value aggregate(const sql::Aggregate& a, const Frame& f) {
        if (!f.group) throw ExecError("aggregate outside a grouped context");
        if (a.star) return Value::integer(static_cast<std::int64_t>(f.group->size()));
        std::vector<Value> values;
        for (const auto& t : *f.group) {
            Frame row{f.sources, &t, nullptr, f.select, f.outer};
            values.push_back(eval(**a.arg, row));
        }
        return detail::fold(to_agg(a.fn), std::move(values), a.distinct, false);
    }

    const ResultSet& subquery(const sql::Select& sub, const Frame& f, ResultSet& scratch) {
        auto hit = uncorrelated_.find(&sub);
        if (hit == uncorrelated_.end()) {
            auto c = correlated_.find(&sub);
            if (c == correlated_.end()) c = correlated_.emplace(&sub, is_correlated(sub)).first;
            if (c->second) {
                scratch = run(sub, &f);
                return scratch;
            }
            hit = uncorrelated_.emplace(&sub, run(sub, &f)).first;
        }
        return hit->second;
    }

    Value eval(const sql::Expr& e, const Frame& f) {
        return std::visit(
            [&](const auto& n) -> Value {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, sql::Literal>) {
                    return n.value;
                } else if constexpr (std::is_same_v<T, sql::ColumnRef>) {
                    return column(n, f);
                } else if constexpr (std::is_same_v<T, sql::Aggregate>) {
                    return aggregate(n, f);
                } else if constexpr (std::is_same_v<T, sql::ScalarSubquery>) {
                    ResultSet scratch;
                    const ResultSet& r = subquery(*n.subquery, f, scratch);
                    if (r.columns.size() != 1) throw ExecError("scalar subquery must return one column");
                    return r.rows.empty() ? Value::null() : r.rows.front().front();
                } else {
                    return truth(pred(e, f));
                }
            },
            e.node);
    }

    std::optional<bool> pred(const sql::Expr& e, const Frame& f) {
        return std::visit(
            [&](const auto& n) -> std::optional<bool> {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, sql::Comparison>) {
                    return compare_values(n.op, eval(*n.lhs, f), eval(*n.rhs, f));
                } else if constexpr (std::is_same_v<T, sql::Like>) {
                    auto m = like_match(eval(*n.operand, f), eval(*n.pattern, f));
                    return n.negated ? tri_not(m) : m;
                } else if constexpr (std::is_same_v<T, sql::InList>) {
                    std::vector<Value> list;
                    for (const auto& i : n.items) list.push_back(eval(i, f));
                    auto m = member(eval(*n.operand, f), list);
                    return n.negated ? tri_not(m) : m;
                } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
                    ResultSet scratch;
                    const ResultSet& r = subquery(*n.subquery, f, scratch);
                    if (r.columns.size() != 1) throw ExecError("IN subquery must return one column");
                    std::vector<Value> list;
                    for (const auto& row : r.rows) list.push_back(row.front());
                    auto m = member(eval(*n.operand, f), list);
                    return n.negated ? tri_not(m) : m;
                } else if constexpr (std::is_same_v<T, sql::IsNull>) {
                    return eval(*n.operand, f).is_null() != n.negated;
                } else if constexpr (std::is_same_v<T, sql::And>) {
                    auto l = pred(*n.lhs, f);
                    if (l == false) return false;
                    return tri_and(l, pred(*n.rhs, f));
                } else if constexpr (std::is_same_v<T, sql::Or>) {
                    auto l = pred(*n.lhs, f);
                    if (l == true) return true;
                    return tri_or(l, pred(*n.rhs, f));
                } else if constexpr (std::is_same_v<T, sql::Not>) {
                    return tri_not(pred(*n.operand, f));
                } else {
                    const Value v = eval(e, f);
                    if (v.is_null()) return std::nullopt;
                    if (v.is_numeric()) return v.as_double() != 0.0;
                    return false;
                }
            },
            e.node);
    }

    static std::optional<bool> member(const Value& x, const std::vector<Value>& list) {
        if (list.empty()) return false;
        if (x.is_null()) return std::nullopt;
        bool saw_null = false;
        for (const auto& v : list) {
            if (v.is_null()) {
                saw_null = true;
            } else if (v == x) {
                return true;
            }
        }
        if (saw_null) return std::nullopt;
        return false;
    }

    const RelationalDatabase& db_;
    std::map<const sql::Select*, ResultSet> uncorrelated_;
    std::map<const sql::Select*, bool> correlated_;
};

}  // namespace

ResultSet exec_sql(const RelationalDatabase& db, const sql::Select& tree) {
    sql::Select bound;
    try {
        bound = normalize_identifiers(tree, SchemaBinding::from_database(db));
    } catch (const UnknownSchemaItem& e) {
        throw ExecError(e.what());
    }
    return SqlExec(db).run(bound, nullptr);
}

}  // namespace relkg
