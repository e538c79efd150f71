#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/build.hpp"
#include "relkg/exec.hpp"
#include "relkg/graph.hpp"
#include "relkg/relational.hpp"
#include "relkg/repair.hpp"
#include "relkg/workload.hpp"

namespace relkg {

// ---------------------------------------------------------------------------
// Mapping consistency

struct StatDiff {
    /// `label`, `type`, `label_keys` or `type_keys`.
    std::string kind;
    std::string name;
    std::string expected;
    std::string actual;
    friend bool operator==(const StatDiff&, const StatDiff&) = default;
};

/// Graph statistics the relational side predicts: one node per entity row,
/// one edge per resolved (linking row, endpoint pair) and per resolved
/// entity key, all columns as node keys, non-key columns as edge keys.
GraphStats expected_stats(const RelationalDatabase& db, const TableClassification& cls);

std::vector<StatDiff> diff_stats(const GraphStats& expected, const GraphStats& actual);

struct ConsistencyReport {
    GraphStats expected;
    GraphStats actual;
    std::vector<StatDiff> diff;
    /// Diff of every iteration, first to last.
    std::vector<std::vector<StatDiff>> history;
    int iterations = 0;
    bool converged = false;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Compare expected and actual statistics; on a difference, re-normalize
/// db, rebuild graph and check again, up to max_iterations checks.
/// db and graph are updated in place.
ConsistencyReport check_and_repair(RelationalDatabase& db, PropertyGraph& graph, int max_iterations = 3);

// ---------------------------------------------------------------------------
// Migration

struct MigrationOptions {
    RepairOptions repairs;
    /// SQL used for join-based key inference.
    std::vector<std::string> workload;
    int max_iterations = 3;
};

struct Migration {
    /// The database as loaded (manifest applied), before repairs.
    RelationalDatabase original;
    RelationalDatabase repaired;
    RepairLog repairs;
    TableClassification classification;
    PropertyGraph graph;
    BuildLog build;
    ConsistencyReport consistency;

    /// Table renames recorded by namespacing, old -> new.
    std::vector<std::pair<std::string, std::string>> renames() const;
};

Migration migrate(RelationalDatabase db, const MigrationOptions& options = {});

// ---------------------------------------------------------------------------
// Metrics

struct QueryOutcome {
    std::string db_id;
    std::string sql;
    bool parsed = false;
    std::string parse_error;
    /// The SQL side failed to execute; the query is left out of N.
    bool sql_failed = false;
    std::string sql_error;
    std::optional<std::string> cypher;
    /// Why translation or Cypher execution failed (counted as a mismatch).
    std::string failure;
    std::optional<ResultSet> r_sql;
    std::optional<ResultSet> r_cyp;
    bool match = false;
    /// Known-divergence reasons that apply to a mismatch.
    std::vector<std::string> tags;
    /// Left out of N because a tag explains the mismatch (tagged mode).
    bool excluded = false;

    /// Part of N: parsed, executed on the SQL side, not excluded.
    bool counted() const { return parsed && !sql_failed && !excluded; }
    nlohmann::json to_json() const;
};

/// matches / N over counted outcomes. Throws EmptyWorkload when N = 0.
double execution_accuracy(const std::vector<QueryOutcome>& outcomes);
/// matches / (N + n_parse_failures); 0 when the denominator is 0.
double valid_score(const std::vector<QueryOutcome>& outcomes, std::size_t n_parse_failures);

struct DatabaseMetrics {
    std::size_t n = 0;
    std::size_t matches = 0;
    std::size_t parse_failures = 0;
    std::size_t excluded = 0;
    double ea = 0;
};

struct MetricsReport {
    std::size_t n = 0;
    std::size_t n_parse_failures = 0;
    std::size_t matches = 0;
    std::size_t excluded = 0;
    std::size_t sql_failures = 0;
    double ea = 0;
    double vs = 0;
    bool strict = false;
    std::map<std::string, DatabaseMetrics> per_database;
    /// Tag -> number of mismatching queries carrying it.
    std::map<std::string, std::size_t> divergence_tags;
    std::vector<QueryOutcome> outcomes;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Known-divergence tags (see README): dedup, orphan_fk, not_in_null,
/// order_tie, implicit_group_order, limit_without_order, sum_of_empty.
std::vector<std::string> divergence_tags(const Migration& m, const sql::Select& tree, const ResultSet& r_sql,
                                         const std::optional<ResultSet>& r_cyp);

struct EvalOptions {
    /// Count tagged divergences as plain mismatches.
    bool strict = false;
    unsigned jobs = 1;
};

QueryOutcome evaluate_query(const Migration& m, const std::string& db_id, const std::string& sql, bool strict = false);

/// Run every workload item against its database. Throws WorkloadFormatError
/// for an unknown db_id and EmptyWorkload when nothing executed.
MetricsReport evaluate_workload(const std::map<std::string, const Migration*>& dbs, const Workload& workload,
                                const EvalOptions& options = {});

}  // namespace relkg
