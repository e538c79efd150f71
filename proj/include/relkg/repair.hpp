#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/relational.hpp"

namespace relkg {

enum class RepairKind { PkInferred, FkInferred, FkRetargeted, RowsDeduped, EmptyTableFilled, TableRenamed };

std::string_view to_string(RepairKind k);

struct RepairAction {
    RepairKind kind = RepairKind::PkInferred;
    std::string table;
    std::string detail;
    std::string before;
    std::string after;
    /// False for logged no-ops (no PK candidate, skipped workload query,
    /// ambiguity notes that did not change the schema).
    bool applied = true;
    friend bool operator==(const RepairAction&, const RepairAction&) = default;
};

struct RepairLog {
    std::vector<RepairAction> actions;

    void append(const RepairLog& other) {
        actions.insert(actions.end(), other.actions.begin(), other.actions.end());
    }
    /// Number of applied actions of a kind, optionally for one table.
    std::size_t count(RepairKind kind, std::string_view table = {}) const;
    /// Rows removed by dedup for a table (0 if none).
    std::size_t rows_removed(std::string_view table) const;

    nlohmann::json to_json() const;
    /// One line per action: `<kind> <table>: <detail> [<before> -> <after>]`.
    std::string to_text() const;
};

/// Fill missing primary keys with the column set that another table's
/// foreign key already references. Tables with no such candidate stay
/// PK-less and get a non-applied log entry.
std::pair<RelationalDatabase, RepairLog> infer_primary_keys(RelationalDatabase db);

/// Mine `A JOIN B ON A.x = B.y` pairs from a workload and add inferred
/// foreign keys where no key links A and B yet. Also retargets
/// self-references whose column names another table's single-column PK.
std::pair<RelationalDatabase, RepairLog> infer_foreign_keys(RelationalDatabase db,
                                                            const std::vector<std::string>& workload);

/// Collapse exact duplicate rows; give column-only tables one placeholder row
/// of nulls.
std::pair<RelationalDatabase, RepairLog> normalize_content(RelationalDatabase db);

/// Rename every table to `<domain>.<table>` and rewrite foreign-key targets.
/// Throws InvalidDomainName for an empty domain, a domain containing '.', or
/// a database that is already namespaced.
RelationalDatabase namespace_schema(RelationalDatabase db, const std::string& domain,
                                    RepairLog* log = nullptr);

/// Replay the table_renamed entries of a log on a list of table names.
std::vector<std::string> replay_renames(std::vector<std::string> names, const RepairLog& log);

struct RepairOptions {
    bool infer_foreign_keys = true;
    bool infer_primary_keys = true;
    bool normalize_content = true;
    /// Namespace tables as `<domain>.<table>` when set.
    std::optional<std::string> domain;
};

/// All passes in the fixed order: FK inference/retargeting, PK inference,
/// content normalization, namespacing. (Manifest merge happens at load.)
std::pair<RelationalDatabase, RepairLog> run_repairs(RelationalDatabase db, const RepairOptions& options,
                                                     const std::vector<std::string>& workload = {});

}  // namespace relkg
