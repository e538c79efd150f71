#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "relkg/relational.hpp"

namespace relkg {

enum class WorkloadFormat { Jsonl, Plain };

/// "jsonl" or "plain"; throws UnsupportedFormat otherwise.
WorkloadFormat parse_workload_format(std::string_view name);

struct WorkloadItem {
    std::string db_id;
    std::string sql;
    std::optional<std::string> question;
    friend bool operator==(const WorkloadItem&, const WorkloadItem&) = default;
};

struct Workload {
    std::vector<WorkloadItem> items;
    WorkloadFormat format = WorkloadFormat::Jsonl;
    std::size_t size() const { return items.size(); }
    friend bool operator==(const Workload&, const Workload&) = default;
};

/// jsonl: one object per line with "db_id" and "query" (or "sql"), plus an
/// optional "question". plain: one SQL statement per line; blank lines and
/// lines starting with `--` are skipped; every item gets default_db.
///
/// When known_dbs is given, an item naming another database is an error.
/// Throws WorkloadFormatError.
Workload parse_workload(std::string_view text, WorkloadFormat format, const std::string& default_db = {},
                        const std::set<std::string>* known_dbs = nullptr);
Workload load_workload(const std::filesystem::path& path, WorkloadFormat format, const std::string& default_db = {},
                       const std::set<std::string>* known_dbs = nullptr);

/// Throws WorkloadFormatError listing every db_id not in known.
void check_workload_databases(const Workload& w, const std::set<std::string>& known);

std::string to_jsonl(const Workload& w);

struct GeneratorLimits {
    std::size_t max_tables = 5;
    std::size_t max_rows = 6;
    std::size_t max_queries = 50;
};

/// Which schema shapes a generated instance exercises (coverage counters).
struct GeneratedShapes {
    bool entity_no_fk = false;          // fk == 0
    bool entity_fk_not_two = false;     // fk == 1 or fk >= 3
    bool entity_two_fk_single_pk = false;
    bool linking = false;
    bool hyperedge = false;             // fk >= 3
};

struct GeneratedInstance {
    RelationalDatabase db;
    Workload workload;
    GeneratedShapes shapes;
};

/// Small random database plus queries drawn from templates that cover the
/// translation rules (joins over keys, negation, IN subqueries, grouping,
/// HAVING, UNION, ORDER BY with LIMIT/OFFSET, aggregates). Deterministic in
/// seed; limits are clamped to 5 tables, 6 rows and 50 queries.
GeneratedInstance generate_random_instance(std::uint64_t seed, GeneratorLimits limits = {});

}  // namespace relkg
