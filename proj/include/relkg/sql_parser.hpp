#pragma once

#include <string_view>
#include <variant>

#include "relkg/errors.hpp"
#include "relkg/sql_ast.hpp"

namespace relkg::sql {

/// Parse one query of the conjunctive SQL subset: SELECT [DISTINCT] with
/// column refs, `*`, and count/avg/max/min/sum; FROM with aliases and
/// [INNER] JOIN ... ON chains or commas; WHERE with comparisons, LIKE,
/// BETWEEN, IN / NOT IN (lists or subqueries), IS [NOT] NULL, AND/OR/NOT;
/// GROUP BY, HAVING, ORDER BY, LIMIT, OFFSET; UNION [ALL].
///
/// Keywords and identifiers are case-insensitive. Double-quoted tokens in
/// expression position are string literals (the benchmark convention);
/// backticks and brackets quote identifiers. Anything outside the subset
/// (outer joins, arithmetic, other functions, CASE, EXISTS, ...) throws
/// ParseError.
Select parse_sql(std::string_view text);

/// Non-throwing variant: a parse failure is a normal outcome (it feeds the
/// valid score).
std::variant<Select, ParseError> try_parse_sql(std::string_view text);

}  // namespace relkg::sql
