#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/relational.hpp"

namespace relkg {

/// Parse a UTF-8 SQL script (SQLite dialect subset): CREATE TABLE statements
/// with column/table PRIMARY KEY and FOREIGN KEY constraints, optionally
/// followed by INSERT INTO statements. Statements that are neither are kept as
/// warnings on the result. Throws DumpSyntaxError for a malformed CREATE TABLE.
RelationalDatabase load_sql_dump(std::string_view text, std::string name = {});

/// Key overrides for one database, shape-compatible with Spider/KaggleDBQA
/// `tables.json` entries.
struct ManifestForeignKey {
    std::string table;
    std::string column;
    std::string referenced_table;
    std::string referenced_column;
};

struct Manifest {
    std::string db_id;
    /// Per table, the listed column names (may be empty if not given).
    std::vector<std::pair<std::string, std::vector<std::string>>> tables;
    /// Per table, primary-key columns.
    std::vector<std::pair<std::string, std::vector<std::string>>> primary_keys;
    std::vector<ManifestForeignKey> foreign_keys;

    bool empty() const { return tables.empty() && primary_keys.empty() && foreign_keys.empty(); }
};

/// Decode a manifest document. Accepts a single object or an array of
/// objects (selected by db_id when given). Throws ManifestMismatch on
/// structural errors.
Manifest parse_manifest(const nlohmann::json& doc, std::string_view db_id = {});
Manifest load_manifest_file(const std::filesystem::path& path, std::string_view db_id = {});

/// Merge manifest keys into db (origin = manifest). A manifest primary key
/// replaces the declared one; a manifest foreign key replaces any declared
/// key on the same columns. Throws ManifestMismatch for unknown tables or
/// columns.
RelationalDatabase apply_manifest(RelationalDatabase db, const Manifest& manifest);

/// Load a directory of `<table>.csv` files (header row = column names). Key
/// constraints come from `manifest.json` in the same directory, if present.
RelationalDatabase load_csv_bundle(const std::filesystem::path& dir, std::string name = {});

/// Parse one CSV document (RFC 4180 quoting) into records.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Lenient literal typing shared by INSERT and CSV ingestion: integers,
/// decimals, NULL; anything else is text verbatim.
Value parse_lenient_literal(std::string_view token);

/// Load a database directory or file: `schema.sql` (plus optional
/// `manifest.json`) or a CSV bundle, or a single `.sql` file.
RelationalDatabase load_database(const std::filesystem::path& path, std::string name = {});

}  // namespace relkg
