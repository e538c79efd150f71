#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relkg/value.hpp"

namespace relkg {

enum class TypeTag { Int, Real, Text, Unknown };
enum class KeyOrigin { Declared, Manifest, Inferred };

std::string_view to_string(TypeTag t);
std::string_view to_string(KeyOrigin o);

struct Column {
    std::string name;
    TypeTag type = TypeTag::Unknown;
    friend bool operator==(const Column&, const Column&) = default;
};

using Row = std::vector<Value>;

struct ForeignKey {
    std::vector<std::string> columns;
    std::string referenced_table;
    std::vector<std::string> referenced_columns;
    KeyOrigin origin = KeyOrigin::Declared;
    friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<Row> rows;
    std::vector<std::string> primary_key;
    std::vector<ForeignKey> foreign_keys;
    /// Set when rows holds a single all-null row synthesized for an empty table.
    bool placeholder = false;

    /// Case-insensitive column lookup.
    std::optional<std::size_t> column_index(std::string_view column) const;
    bool has_column(std::string_view column) const { return column_index(column).has_value(); }
    /// Exact-case spelling of a column name, if present.
    std::optional<std::string> column_name(std::string_view column) const;
    std::vector<std::string> column_names() const;

    friend bool operator==(const Table&, const Table&) = default;
};

struct RelationalDatabase {
    std::string name;
    std::vector<Table> tables;
    /// Loader diagnostics (skipped statements, malformed rows).
    std::vector<std::string> warnings;

    /// Case-insensitive table lookup.
    const Table* find_table(std::string_view table) const;
    Table* find_table(std::string_view table);

    friend bool operator==(const RelationalDatabase&, const RelationalDatabase&) = default;
};

/// Union of several databases into one. Same-named tables (case-insensitive)
/// merge: columns union in first-seen order, rows pad missing columns with
/// null, keys come from the first occurrence. This reproduces loading two
/// databases into one graph without namespacing.
RelationalDatabase merge_databases(const std::vector<RelationalDatabase>& dbs, std::string name);

// ---------------------------------------------------------------------------
// Table classification

enum class TableKind { Entity, Linking };

/// Which rule decided a table's kind.
enum class ClassReason {
    NoForeignKeys,           // entity: fk == {}
    ForeignKeyCountNotTwo,   // entity: len(fk) != 2
    TwoForeignKeysSinglePk,  // entity: len(fk) == 2 and len(pk) == 1
    TwoForeignKeysNoSinglePk // linking: len(fk) == 2 and len(pk) != 1
};

std::string_view to_string(TableKind k);
std::string_view to_string(ClassReason r);

/// Entity-table predicate over constraint counts.
constexpr bool is_entity_table(std::size_t fk_count, std::size_t pk_count) {
    return fk_count == 0 || fk_count != 2 || (fk_count == 2 && pk_count == 1);
}

/// Linking-table predicate over constraint counts.
constexpr bool is_linking_table(std::size_t fk_count, std::size_t pk_count) {
    return fk_count == 2 && (pk_count != 1 || pk_count == 0);
}

struct TableClass {
    std::string table;
    TableKind kind = TableKind::Entity;
    ClassReason reason = ClassReason::NoForeignKeys;
    std::vector<std::string> columns;
    std::vector<std::string> primary_key;
    /// Linking: the two endpoint keys (source side first). Entity: outbound
    /// keys realized as <referenced>_HAS_<table> edges.
    std::vector<ForeignKey> foreign_keys;

    bool is_linking() const { return kind == TableKind::Linking; }
    friend bool operator==(const TableClass&, const TableClass&) = default;
};

struct TableClassification {
    std::vector<TableClass> tables;

    const TableClass* find(std::string_view table) const;
    friend bool operator==(const TableClassification&, const TableClassification&) = default;
};

TableClassification classify_tables(const RelationalDatabase& db);

/// Edge type for an entity table's outbound key: <referenced>_HAS_<owner>.
std::string has_edge_type(std::string_view referenced_table, std::string_view owning_table);

}  // namespace relkg
