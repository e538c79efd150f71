#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/cypher.hpp"
#include "relkg/graph.hpp"
#include "relkg/relational.hpp"
#include "relkg/sql_ast.hpp"

namespace relkg {

struct ResultSet {
    std::vector<std::string> columns;
    std::vector<Row> rows;
    /// The query had an explicit ORDER BY.
    bool ordered = false;
    /// Some adjacent rows share every ORDER BY key but differ elsewhere, so
    /// another engine may legally return them in a different order.
    bool has_ties = false;

    /// Rows as a JSON array of arrays.
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Execute a SELECT against the relational store. The tree is bound to db's
/// schema first (any identifier case works). Throws ExecError for unknown
/// names or a malformed query.
ResultSet exec_sql(const RelationalDatabase& db, const sql::Select& tree);

/// Execute a Cypher query against the graph. Throws ExecError for unbound
/// variables.
ResultSet exec_cypher(const PropertyGraph& g, const cypher::CypherQuery& q);

/// Element-wise when both sides are ordered, multiset equality otherwise.
/// Numbers compare by value (1 == 1.0).
bool compare_results(const ResultSet& a, const ResultSet& b);

/// The two result sets are equal after treating nulls as 0.
bool compare_results_null_as_zero(const ResultSet& a, const ResultSet& b);

}  // namespace relkg
