#pragma once

// Template definitions for sql_ast.hpp.

namespace relkg::sql {

namespace detail {

template <class F>
void visit_expr_selects(const Expr& e, F& f);

template <class F>
void visit_select(const Select& s, F& f) {
    f(s);
    for (const auto& item : s.items) {
        if (item.expr) visit_expr_selects(*item.expr, f);
    }
    for (const auto& from : s.from) {
        if (from.on) visit_expr_selects(*from.on, f);
    }
    if (s.where) visit_expr_selects(*s.where, f);
    if (s.having) visit_expr_selects(*s.having, f);
    if (s.union_with) visit_select(*s.union_with->next, f);
}

template <class F>
void visit_expr_selects(const Expr& e, F& f) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, InSubquery>) {
                visit_expr_selects(*n.operand, f);
                visit_select(*n.subquery, f);
            } else if constexpr (std::is_same_v<T, ScalarSubquery>) {
                visit_select(*n.subquery, f);
            } else if constexpr (std::is_same_v<T, Comparison> || std::is_same_v<T, And> ||
                                 std::is_same_v<T, Or>) {
                visit_expr_selects(*n.lhs, f);
                visit_expr_selects(*n.rhs, f);
            } else if constexpr (std::is_same_v<T, Like>) {
                visit_expr_selects(*n.operand, f);
                visit_expr_selects(*n.pattern, f);
            } else if constexpr (std::is_same_v<T, InList>) {
                visit_expr_selects(*n.operand, f);
                for (const auto& i : n.items) visit_expr_selects(i, f);
            } else if constexpr (std::is_same_v<T, IsNull> || std::is_same_v<T, Not>) {
                visit_expr_selects(*n.operand, f);
            }
        },
        e.node);
}

}  // namespace detail

template <class F>
void for_each_select(const Select& s, F&& f) {
    detail::visit_select(s, f);
}

}  // namespace relkg::sql
