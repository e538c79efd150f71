#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <span>

#include "agg.hpp"
#include "relkg/errors.hpp"
#include "relkg/exec.hpp"

namespace relkg {

namespace {

namespace C = cypher;

/// A runtime binding: nothing, a node or edge (by position), a scalar, or a
/// list of scalars (collect()).
struct Binding {
    enum class Kind { Null, Node, Edge, Scalar, List };
    Kind kind = Kind::Null;
    std::size_t pos = 0;
    Value value;
    std::vector<Value> list;

    static Binding scalar(Value v) {
        if (v.is_null()) return {};
        return {Kind::Scalar, 0, std::move(v), {}};
    }
    static Binding node(std::size_t p) { return {Kind::Node, p, {}, {}}; }
    static Binding edge(std::size_t p) { return {Kind::Edge, p, {}, {}}; }
    bool is_null() const { return kind == Kind::Null; }

    friend auto operator<=>(const Binding& a, const Binding& b) {
        if (a.kind != b.kind) return a.kind <=> b.kind;
        if (a.pos != b.pos) return a.pos <=> b.pos;
        if (auto c = a.value <=> b.value; c != 0) return c;
        return std::lexicographical_compare_three_way(a.list.begin(), a.list.end(), b.list.begin(), b.list.end());
    }
    friend bool operator==(const Binding& a, const Binding& b) { return (a <=> b) == 0; }
};

using CRow = std::vector<std::pair<std::string, Binding>>;

const Binding* lookup(const CRow& row, std::string_view name) {
    for (auto it = row.rbegin(); it != row.rend(); ++it) {
        if (it->first == name) return &it->second;
    }
    return nullptr;
}

detail::Agg to_agg(C::AggFn fn) {
    switch (fn) {
        case C::AggFn::Avg: return detail::Agg::Avg;
        case C::AggFn::Max: return detail::Agg::Max;
        case C::AggFn::Min: return detail::Agg::Min;
        case C::AggFn::Sum: return detail::Agg::Sum;
        default: return detail::Agg::Count;
    }
}

Binding truth(std::optional<bool> b) { return b ? Binding::scalar(Value::integer(*b ? 1 : 0)) : Binding{}; }

std::optional<bool> member(const Binding& x, const std::vector<Value>& list) {
    if (list.empty()) return false;
    if (x.is_null()) return std::nullopt;
    bool saw_null = false;
    for (const auto& v : list) {
        if (v.is_null()) {
            saw_null = true;
        } else if (x.kind == Binding::Kind::Scalar && v == x.value) {
            return true;
        }
    }
    if (saw_null) return std::nullopt;
    return false;
}

class CypherExec {
public:
    explicit CypherExec(const PropertyGraph& g) : g_(g) {}

    ResultSet run(const C::CypherQuery& q) {
        if (q.parts.empty()) throw ExecError("empty query");
        ResultSet out = single(q.parts[0]);
        for (std::size_t i = 1; i < q.parts.size(); ++i) {
            ResultSet next = single(q.parts[i]);
            if (next.columns != out.columns) throw ExecError("UNION branches return different column names");
            out.rows.insert(out.rows.end(), next.rows.begin(), next.rows.end());
            const bool all = i - 1 < q.union_all.size() && q.union_all[i - 1];
            if (!all) {
                std::set<Row> seen;
                std::vector<Row> kept;
                for (auto& r : out.rows) {
                    if (seen.insert(r).second) kept.push_back(std::move(r));
                }
                out.rows = std::move(kept);
            }
            out.ordered = false;
            out.has_ties = false;
        }
        return out;
    }

private:
    // ------------------------------------------------------------------
    // Pattern matching

    bool node_ok(std::size_t pos, const C::NodePattern& p) const {
        const Node& n = g_.nodes()[pos];
        if (n.placeholder) return false;
        if (!p.label.empty() && n.label != p.label) return false;
        for (const auto& [k, v] : p.props) {
            auto it = n.properties.find(k);
            if (it == n.properties.end() || compare_values(CompareOp::Eq, it->second, v) != true) return false;
        }
        return true;
    }

    bool edge_ok(std::size_t pos, const C::RelPattern& p) const {
        const Edge& e = g_.edges()[pos];
        if (!p.type.empty() && e.type != p.type) return false;
        for (const auto& [k, v] : p.props) {
            auto it = e.properties.find(k);
            if (it == e.properties.end() || compare_values(CompareOp::Eq, it->second, v) != true) return false;
        }
        return true;
    }

    /// Enumerate matches of paths extending row; `emit` returns false to
    /// stop early. Returns false if stopped.
    class Matcher {
    public:
        using Emit = std::function<bool(const CRow&)>;
        Matcher(const CypherExec& ex, std::span<const C::PatternPath> paths, CRow row, Emit emit)
            : ex_(ex), paths_(paths), row_(std::move(row)), emit_(std::move(emit)) {}

        bool run() { return path(0); }

    private:
        /// Bind var to b if free; returns whether the binding is compatible,
        /// and whether a push happened.
        std::pair<bool, bool> bind(const std::string& var, const Binding& b) {
            if (var.empty()) return {true, false};
            if (const Binding* cur = lookup(row_, var)) return {*cur == b, false};
            row_.emplace_back(var, b);
            return {true, true};
        }

        bool path(std::size_t p) {
            if (p == paths_.size()) return emit_(row_);
            const C::PatternPath& pp = paths_[p];
            auto try_start = [&](std::size_t pos) {
                if (!ex_.node_ok(pos, pp.start)) return true;
                auto [ok, pushed] = bind(pp.start.var, Binding::node(pos));
                bool go = true;
                if (ok) go = step(p, 0, pos);
                if (pushed) row_.pop_back();
                return go;
            };
            if (!pp.start.var.empty()) {
                if (const Binding* b = lookup(row_, pp.start.var)) {
                    if (b->kind != Binding::Kind::Node) return true;
                    return try_start(b->pos);
                }
            }
            if (!pp.start.label.empty()) {
                for (std::size_t pos : ex_.g_.nodes_with_label(pp.start.label)) {
                    if (!try_start(pos)) return false;
                }
                return true;
            }
            for (std::size_t pos = 0; pos < ex_.g_.nodes().size(); ++pos) {
                if (!try_start(pos)) return false;
            }
            return true;
        }

        bool step(std::size_t p, std::size_t s, std::size_t cur) {
            const C::PatternPath& pp = paths_[p];
            if (s == pp.steps.size()) return path(p + 1);
            const C::PathStep& st = pp.steps[s];
            for (std::size_t e : ex_.g_.incident_edges(cur)) {
                if (std::find(used_.begin(), used_.end(), e) != used_.end()) continue;
                if (!ex_.edge_ok(e, st.rel)) continue;
                const Edge& edge = ex_.g_.edges()[e];
                const std::size_t src = ex_.g_.node_index(edge.src);
                const std::size_t other = src == cur ? ex_.g_.node_index(edge.dst) : src;
                if (!ex_.node_ok(other, st.node)) continue;
                auto [rel_ok, rel_pushed] = bind(st.rel.var, Binding::edge(e));
                if (!rel_ok) continue;
                auto [node_ok, node_pushed] = bind(st.node.var, Binding::node(other));
                bool go = true;
                if (node_ok) {
                    used_.push_back(e);
                    go = step(p, s + 1, other);
                    used_.pop_back();
                }
                if (node_pushed) row_.pop_back();
                if (rel_pushed) row_.pop_back();
                if (!go) return false;
            }
            return true;
        }

        const CypherExec& ex_;
        std::span<const C::PatternPath> paths_;
        CRow row_;
        Emit emit_;
        std::vector<std::size_t> used_;
    };

    // ------------------------------------------------------------------
    // Expressions

    struct Group {
        const std::vector<const CRow*>* rows = nullptr;
    };

    Binding eval(const C::Expr& e, const CRow& row, const Group* group) {
        return std::visit(
            [&](const auto& n) -> Binding {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, C::Literal>) {
                    return Binding::scalar(n.value);
                } else if constexpr (std::is_same_v<T, C::Variable>) {
                    const Binding* b = lookup(row, n.name);
                    if (!b) throw ExecError("unbound variable " + n.name);
                    return *b;
                } else if constexpr (std::is_same_v<T, C::Property>) {
                    const Binding* b = lookup(row, n.var);
                    if (!b) throw ExecError("unbound variable " + n.var);
                    const PropertyMap* props = nullptr;
                    if (b->kind == Binding::Kind::Node) {
                        props = &g_.nodes()[b->pos].properties;
                    } else if (b->kind == Binding::Kind::Edge) {
                        props = &g_.edges()[b->pos].properties;
                    } else if (b->kind == Binding::Kind::Null) {
                        return {};
                    } else {
                        throw ExecError("property access on a non-entity " + n.var);
                    }
                    auto it = props->find(n.key);
                    return it == props->end() ? Binding{} : Binding::scalar(it->second);
                } else if constexpr (std::is_same_v<T, C::ListLiteral>) {
                    Binding out{Binding::Kind::List, 0, {}, {}};
                    for (const auto& i : n.items) out.list.push_back(scalar(eval(i, row, group)));
                    return out;
                } else if constexpr (std::is_same_v<T, C::Aggregate>) {
                    return aggregate(n, group);
                } else {
                    return truth(pred(e, row, group));
                }
            },
            e.node);
    }

    static Value scalar(const Binding& b) {
        if (b.kind == Binding::Kind::Null) return Value::null();
        if (b.kind != Binding::Kind::Scalar) throw ExecError("expected a scalar value");
        return b.value;
    }

    Binding aggregate(const C::Aggregate& a, const Group* group) {
        if (!group) throw ExecError("aggregate outside a projection");
        const auto& rows = *group->rows;
        if (a.star) return Binding::scalar(Value::integer(static_cast<std::int64_t>(rows.size())));
        std::vector<Binding> args;
        for (const CRow* r : rows) args.push_back(eval(**a.arg, *r, nullptr));
        std::erase_if(args, [](const Binding& b) { return b.is_null(); });
        if (a.distinct) {
            std::set<Binding> seen;
            std::vector<Binding> kept;
            for (auto& b : args) {
                if (seen.insert(b).second) kept.push_back(std::move(b));
            }
            args = std::move(kept);
        }
        if (a.fn == C::AggFn::Count) return Binding::scalar(Value::integer(static_cast<std::int64_t>(args.size())));
        std::vector<Value> values;
        for (const auto& b : args) values.push_back(scalar(b));
        if (a.fn == C::AggFn::Collect) return Binding{Binding::Kind::List, 0, {}, std::move(values)};
        return Binding::scalar(detail::fold(to_agg(a.fn), std::move(values), false, true));
    }

    const std::regex& regex(const std::string& pattern) {
        auto it = regex_cache_.find(pattern);
        if (it == regex_cache_.end()) {
            try {
                it = regex_cache_.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
            } catch (const std::regex_error& err) {
                throw ExecError("invalid regular expression " + pattern + ": " + err.what());
            }
        }
        return it->second;
    }

    std::optional<bool> pred(const C::Expr& e, const CRow& row, const Group* group) {
        return std::visit(
            [&](const auto& n) -> std::optional<bool> {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, C::Comparison>) {
                    return compare_values(n.op, scalar(eval(*n.lhs, row, group)), scalar(eval(*n.rhs, row, group)));
                } else if constexpr (std::is_same_v<T, C::StringMatch>) {
                    const Value l = scalar(eval(*n.lhs, row, group));
                    const Value r = scalar(eval(*n.rhs, row, group));
                    if (l.is_null() || r.is_null()) return std::nullopt;
                    const std::string s = l.to_display();
                    const std::string p = r.to_display();
                    switch (n.op) {
                        case C::StringOp::Contains: return s.find(p) != std::string::npos;
                        case C::StringOp::StartsWith: return s.starts_with(p);
                        case C::StringOp::EndsWith: return s.ends_with(p);
                        case C::StringOp::Regex: return std::regex_match(s, regex(p));
                    }
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, C::In>) {
                    const Binding list = eval(*n.list, row, group);
                    if (list.is_null()) return std::nullopt;
                    if (list.kind != Binding::Kind::List) throw ExecError("IN over a non-list");
                    return member(eval(*n.operand, row, group), list.list);
                } else if constexpr (std::is_same_v<T, C::IsNull>) {
                    return eval(*n.operand, row, group).is_null() != n.negated;
                } else if constexpr (std::is_same_v<T, C::And>) {
                    auto l = pred(*n.lhs, row, group);
                    if (l == false) return false;
                    return tri_and(l, pred(*n.rhs, row, group));
                } else if constexpr (std::is_same_v<T, C::Or>) {
                    auto l = pred(*n.lhs, row, group);
                    if (l == true) return true;
                    return tri_or(l, pred(*n.rhs, row, group));
                } else if constexpr (std::is_same_v<T, C::Not>) {
                    return tri_not(pred(*n.operand, row, group));
                } else if constexpr (std::is_same_v<T, C::PatternPredicate>) {
                    bool found = false;
                    Matcher m(*this, std::span(&n.path, 1), row, [&](const CRow&) {
                        found = true;
                        return false;
                    });
                    m.run();
                    return found;
                } else {
                    const Binding b = eval(e, row, group);
                    if (b.is_null()) return std::nullopt;
                    if (b.kind == Binding::Kind::Scalar && b.value.is_numeric()) return b.value.as_double() != 0.0;
                    throw ExecError("expected a boolean expression");
                }
            },
            e.node);
    }

    // ------------------------------------------------------------------
    // Clauses

    std::vector<CRow> match(const C::Match& m, std::vector<CRow> rows) {
        std::vector<CRow> out;
        for (const auto& row : rows) {
            Matcher mt(*this, m.patterns, row, [&](const CRow& r) {
                if (!m.where || pred(*m.where, r, nullptr) == true) out.push_back(r);
                return true;
            });
            mt.run();
        }
        return out;
    }

    struct Projected {
        std::vector<std::string> names;
        std::vector<CRow> rows;
        /// For non-aggregating projections, the input row of each output.
        std::vector<const CRow*> sources;
        bool aggregating = false;
    };

    Projected project(const std::vector<C::ProjectionItem>& items, bool distinct, const std::vector<CRow>& rows) {
        Projected p;
        for (const auto& i : items) p.names.push_back(C::column_name(i));
        std::vector<bool> agg;
        for (const auto& i : items) {
            agg.push_back(C::contains_aggregate(i.expr));
            p.aggregating = p.aggregating || agg.back();
        }
        auto make_row = [&](const CRow& first, const Group* group) {
            CRow out;
            for (std::size_t k = 0; k < items.size(); ++k) out.emplace_back(p.names[k], eval(items[k].expr, first, group));
            return out;
        };
        if (!p.aggregating) {
            for (const auto& r : rows) {
                p.rows.push_back(make_row(r, nullptr));
                p.sources.push_back(&r);
            }
        } else {
            std::map<std::vector<Binding>, std::size_t> index;
            std::vector<std::vector<const CRow*>> groups;
            for (const auto& r : rows) {
                std::vector<Binding> key;
                for (std::size_t k = 0; k < items.size(); ++k) {
                    if (!agg[k]) key.push_back(eval(items[k].expr, r, nullptr));
                }
                auto [it, fresh] = index.emplace(std::move(key), groups.size());
                if (fresh) groups.emplace_back();
                groups[it->second].push_back(&r);
            }
            const bool has_keys = std::find(agg.begin(), agg.end(), false) != agg.end();
            if (groups.empty() && !has_keys) groups.emplace_back();
            static const CRow empty;
            for (const auto& g : groups) {
                Group grp{&g};
                p.rows.push_back(make_row(g.empty() ? empty : *g.front(), &grp));
            }
        }
        if (distinct) {
            std::set<CRow> seen;
            std::vector<CRow> kept;
            std::vector<const CRow*> kept_src;
            for (std::size_t i = 0; i < p.rows.size(); ++i) {
                if (!seen.insert(p.rows[i]).second) continue;
                kept.push_back(std::move(p.rows[i]));
                if (!p.sources.empty()) kept_src.push_back(p.sources[i]);
            }
            p.rows = std::move(kept);
            p.sources = std::move(kept_src);
        }
        return p;
    }

    std::vector<CRow> with(const C::With& w, const std::vector<CRow>& rows) {
        Projected p = project(w.items, w.distinct, rows);
        if (!w.where) return std::move(p.rows);
        std::vector<CRow> out;
        for (auto& r : p.rows) {
            if (pred(*w.where, r, nullptr) == true) out.push_back(std::move(r));
        }
        return out;
    }

    static Value output_value(const Binding& b, const PropertyGraph& g) {
        switch (b.kind) {
            case Binding::Kind::Null: return Value::null();
            case Binding::Kind::Scalar: return b.value;
            case Binding::Kind::Node: return Value::text("node#" + std::to_string(g.nodes()[b.pos].id));
            case Binding::Kind::Edge: return Value::text("edge#" + std::to_string(g.edges()[b.pos].id));
            case Binding::Kind::List: {
                std::string s = "[";
                for (std::size_t i = 0; i < b.list.size(); ++i) s += (i ? ", " : "") + b.list[i].to_cypher_literal();
                return Value::text(s + "]");
            }
        }
        return Value::null();
    }

    ResultSet single(const C::SingleQuery& q) {
        std::vector<CRow> rows{CRow{}};
        for (const auto& clause : q.clauses) {
            if (const auto* m = std::get_if<C::Match>(&clause)) {
                rows = match(*m, std::move(rows));
            } else {
                rows = with(std::get<C::With>(clause), rows);
            }
        }
        const C::Return& ret = q.ret;
        Projected p = project(ret.items, ret.distinct, rows);

        ResultSet out;
        out.columns = p.names;
        std::vector<std::size_t> order(p.rows.size());
        std::iota(order.begin(), order.end(), 0);
        if (!ret.order_by.empty()) {
            std::vector<std::vector<Value>> keys;
            for (std::size_t r = 0; r < p.rows.size(); ++r) {
                std::vector<Value> key;
                for (const auto& o : ret.order_by) key.push_back(order_key(o.expr, ret, p, r));
                keys.push_back(std::move(key));
            }
            auto cmp = [&](std::size_t a, std::size_t b) {
                for (std::size_t k = 0; k < ret.order_by.size(); ++k) {
                    const auto c = keys[a][k] <=> keys[b][k];
                    if (c != 0) return ret.order_by[k].descending ? c > 0 : c < 0;
                }
                return false;
            };
            std::stable_sort(order.begin(), order.end(), cmp);
            out.ordered = true;
            for (std::size_t i = 1; i < order.size(); ++i) {
                if (keys[order[i]] == keys[order[i - 1]] && p.rows[order[i]] != p.rows[order[i - 1]]) out.has_ties = true;
            }
        }
        for (std::size_t idx : order) {
            Row row;
            for (const auto& [name, b] : p.rows[idx]) row.push_back(output_value(b, g_));
            out.rows.push_back(std::move(row));
        }
        const std::size_t skip = ret.skip && *ret.skip > 0 ? static_cast<std::size_t>(*ret.skip) : 0;
        out.rows.erase(out.rows.begin(), out.rows.begin() + static_cast<std::ptrdiff_t>(std::min(skip, out.rows.size())));
        if (ret.limit && *ret.limit >= 0 && static_cast<std::size_t>(*ret.limit) < out.rows.size()) {
            out.rows.resize(static_cast<std::size_t>(*ret.limit));
        }
        return out;
    }

    Value order_key(const C::Expr& e, const C::Return& ret, const Projected& p, std::size_t r) {
        for (std::size_t k = 0; k < ret.items.size(); ++k) {
            if (ret.items[k].expr == e) return scalar(p.rows[r][k].second);
        }
        if (e.is<C::Variable>()) {
            for (std::size_t k = 0; k < p.names.size(); ++k) {
                if (p.names[k] == e.as<C::Variable>().name) return scalar(p.rows[r][k].second);
            }
        }
        if (p.aggregating || ret.distinct) throw ExecError("ORDER BY expression is not projected");
        CRow scope = *p.sources[r];
        for (const auto& item : p.rows[r]) scope.push_back(item);
        return scalar(eval(e, scope, nullptr));
    }

    const PropertyGraph& g_;
    std::map<std::string, std::regex> regex_cache_;
};

}  // namespace

ResultSet exec_cypher(const PropertyGraph& g, const cypher::CypherQuery& q) { return CypherExec(g).run(q); }

}  // namespace relkg
