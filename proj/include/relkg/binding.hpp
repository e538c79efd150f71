#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relkg/graph.hpp"
#include "relkg/relational.hpp"
#include "relkg/sql_ast.hpp"

namespace relkg {

/// Exact-case schema names a query is bound against. Lookups are
/// case-insensitive; an exact-case hit wins over a case-folded one.
class SchemaBinding {
public:
    struct TableEntry {
        std::string name;
        std::vector<std::string> columns;
    };

    static SchemaBinding from_database(const RelationalDatabase& db);
    static SchemaBinding from_classification(const TableClassification& cls);
    /// Labels and edge types with the union of their property keys. Key
    /// columns of linking tables are not visible here (they are not edge
    /// properties).
    static SchemaBinding from_graph(const PropertyGraph& g);

    void add_table(std::string name, std::vector<std::string> columns);
    const TableEntry* find_table(std::string_view name) const;
    std::optional<std::string> find_column(const TableEntry& table, std::string_view column) const;
    const std::vector<TableEntry>& tables() const { return tables_; }

private:
    std::vector<TableEntry> tables_;
};

/// Rewrite table and column identifiers to the binding's exact case and
/// qualify every column reference with the binding name (alias or table) of
/// the FROM item it resolves to. References to SELECT-list aliases stay
/// unqualified. ORDER BY prefers aliases; other clauses prefer columns.
/// Throws UnknownSchemaItem for unknown or ambiguous names.
sql::Select normalize_identifiers(sql::Select tree, const SchemaBinding& binding);

/// Replace table names through a rename map (case-insensitive keys), e.g.
/// the table_renamed entries of a repair log.
sql::Select rename_tables(sql::Select tree, const std::vector<std::pair<std::string, std::string>>& renames);

}  // namespace relkg
