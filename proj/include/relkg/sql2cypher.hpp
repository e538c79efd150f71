#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relkg/cypher.hpp"
#include "relkg/relational.hpp"
#include "relkg/sql_ast.hpp"

namespace relkg {

/// SQL clause keyword -> Cypher clause keyword.
struct KeywordMap {
    static const std::vector<std::pair<std::string_view, std::string_view>>& entries();
    /// Empty when the key is not a SQL clause keyword.
    static std::string_view cypher_for(std::string_view sql_key);
};

/// Which SQL clause produced which Cypher clause.
struct Provenance {
    std::string sql_key;
    std::string cypher_clause;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Translation {
    cypher::CypherQuery query;
    std::vector<Provenance> provenance;
};

/// Translate a parse tree into the Cypher subset. Identifiers are normalized
/// against the classification first, so the tree may use any case.
///
/// Joins whose ON/WHERE equalities line up with a foreign key become
/// patterns (linking tables as relationships, other keys as *_HAS_* edges);
/// other join conditions stay as WHERE predicates over comma patterns.
/// NOT IN over a bare key column of a connected table becomes a negated
/// pattern; other IN/NOT IN and scalar aggregate subqueries are computed
/// first and collected into a list (`WITH collect(x) AS sq0`). GROUP BY and
/// HAVING go through a WITH stage.
///
/// Throws UnknownSchemaItem for names missing from cls and
/// UntranslatableQuery for constructs outside the rule set.
Translation translate_with_provenance(const sql::Select& tree, const TableClassification& cls);
cypher::CypherQuery translate(const sql::Select& tree, const TableClassification& cls);

}  // namespace relkg
