#include "relkg/repair.hpp"

#include <algorithm>
#include <unordered_set>

#include "relkg/errors.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/text.hpp"

namespace relkg {

std::string_view to_string(RepairKind k) {
    switch (k) {
        case RepairKind::PkInferred: return "pk_inferred";
        case RepairKind::FkInferred: return "fk_inferred";
        case RepairKind::FkRetargeted: return "fk_retargeted";
        case RepairKind::RowsDeduped: return "rows_deduped";
        case RepairKind::EmptyTableFilled: return "empty_table_filled";
        case RepairKind::TableRenamed: return "table_renamed";
    }
    return "";
}

std::size_t RepairLog::count(RepairKind kind, std::string_view table) const {
    return static_cast<std::size_t>(std::count_if(actions.begin(), actions.end(), [&](const RepairAction& a) {
        return a.applied && a.kind == kind && (table.empty() || iequals(a.table, table));
    }));
}

std::size_t RepairLog::rows_removed(std::string_view table) const {
    std::size_t removed = 0;
    for (const auto& a : actions) {
        if (a.applied && a.kind == RepairKind::RowsDeduped && iequals(a.table, table)) {
            removed += std::stoull(a.before) - std::stoull(a.after);
        }
    }
    return removed;
}

nlohmann::json RepairLog::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : actions) {
        out.push_back({{"kind", std::string(to_string(a.kind))},
                       {"table", a.table},
                       {"detail", a.detail},
                       {"before", a.before},
                       {"after", a.after},
                       {"applied", a.applied}});
    }
    return out;
}

std::string RepairLog::to_text() const {
    std::string out;
    for (const auto& a : actions) {
        out += std::string(to_string(a.kind)) + " " + a.table + ": " + a.detail;
        if (!a.before.empty()) {
            out += " [" + a.before + " -> " + a.after + "]";
        } else if (!a.after.empty()) {
            out += " [" + a.after + "]";
        }
        if (!a.applied) out += " (no change)";
        out += '\n';
    }
    return out;
}

namespace {

std::string describe_key(const std::string& table, const std::vector<std::string>& cols) {
    std::string out = table + "(";
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ", ";
        out += cols[i];
    }
    return out + ")";
}

struct RowHash {
    std::size_t operator()(const Row& r) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (const auto& v : r) h = (h ^ v.hash()) * 0x100000001b3ULL;
        return h;
    }
};

bool column_values_unique(const Table& t, const std::vector<std::string>& cols) {
    std::vector<std::size_t> idx;
    for (const auto& c : cols) {
        auto i = t.column_index(c);
        if (!i) return false;
        idx.push_back(*i);
    }
    std::unordered_set<Row, RowHash> seen;
    for (const auto& row : t.rows) {
        Row key;
        for (std::size_t i : idx) {
            if (row[i].is_null()) return false;
            key.push_back(row[i]);
        }
        if (!seen.insert(std::move(key)).second) return false;
    }
    return true;
}

/// Distinct across all rows; nulls compare equal to each other here.
bool column_distinct(const Table& t, std::size_t col) {
    std::unordered_set<Value, ValueHash> seen;
    for (const auto& row : t.rows) {
        if (!seen.insert(row[col]).second) return false;
    }
    return true;
}

bool tables_linked(const RelationalDatabase& db, const Table& a, const Table& b) {
    auto links = [](const Table& from, const Table& to) {
        return std::any_of(from.foreign_keys.begin(), from.foreign_keys.end(),
                           [&](const ForeignKey& fk) { return iequals(fk.referenced_table, to.name); });
    };
    (void)db;
    return links(a, b) || links(b, a);
}

bool single_pk_is(const Table& t, const std::string& col) {
    return t.primary_key.size() == 1 && iequals(t.primary_key.front(), col);
}

struct ResolvedColumn {
    Table* table = nullptr;
    std::string column;
};

/// Resolve a column reference against the FROM items of one SELECT.
std::optional<ResolvedColumn> resolve(RelationalDatabase& db, const sql::Select& s, const sql::ColumnRef& ref) {
    std::vector<Table*> candidates;
    for (const auto& f : s.from) {
        if (!ref.table.empty() && !iequals(ref.table, f.table.binding_name())) continue;
        Table* t = db.find_table(f.table.name);
        if (t && t->has_column(ref.column)) candidates.push_back(t);
    }
    if (candidates.size() != 1) return std::nullopt;
    return ResolvedColumn{candidates.front(), *candidates.front()->column_name(ref.column)};
}

void retarget_self_references(RelationalDatabase& db, RepairLog& log) {
    for (auto& t : db.tables) {
        for (auto& fk : t.foreign_keys) {
            if (fk.columns.size() != 1 || fk.referenced_columns.size() != 1) continue;
            if (!iequals(fk.referenced_table, t.name)) continue;
            if (iequals(fk.columns.front(), fk.referenced_columns.front())) continue;
            for (const auto& other : db.tables) {
                if (&other == &t || !single_pk_is(other, fk.columns.front())) continue;
                const std::string before = describe_key(fk.referenced_table, fk.referenced_columns);
                fk.referenced_table = other.name;
                fk.referenced_columns = {other.primary_key.front()};
                log.actions.push_back({RepairKind::FkRetargeted, t.name,
                                       "self-reference on " + fk.columns.front() + " retargeted to " + other.name,
                                       before, describe_key(fk.referenced_table, fk.referenced_columns), true});
                break;
            }
        }
    }
}

}  // namespace

std::pair<RelationalDatabase, RepairLog> infer_foreign_keys(RelationalDatabase db,
                                                            const std::vector<std::string>& workload) {
    RepairLog log;
    retarget_self_references(db, log);
    for (const auto& text : workload) {
        auto parsed = sql::try_parse_sql(text);
        if (auto* err = std::get_if<ParseError>(&parsed)) {
            log.actions.push_back({RepairKind::FkInferred, "", "skipped unparseable workload query: " +
                                                                   std::string(err->what()),
                                   "", "", false});
            continue;
        }
        const sql::Select& root = std::get<sql::Select>(parsed);
        sql::for_each_select(root, [&](const sql::Select& s) {
            for (const auto& f : s.from) {
                if (!f.on) continue;
                for (const sql::Expr* c : sql::conjuncts(*f.on)) {
                    if (!c->is<sql::Comparison>()) continue;
                    const auto& cmp = c->as<sql::Comparison>();
                    if (cmp.op != CompareOp::Eq || !cmp.lhs->is<sql::ColumnRef>() || !cmp.rhs->is<sql::ColumnRef>()) {
                        continue;
                    }
                    auto lhs = resolve(db, s, cmp.lhs->as<sql::ColumnRef>());
                    auto rhs = resolve(db, s, cmp.rhs->as<sql::ColumnRef>());
                    if (!lhs || !rhs || lhs->table == rhs->table) continue;
                    if (tables_linked(db, *lhs->table, *rhs->table)) continue;

                    const bool l_pk = single_pk_is(*lhs->table, lhs->column);
                    const bool r_pk = single_pk_is(*rhs->table, rhs->column);
                    // Referenced side = "to".
                    ResolvedColumn from = *lhs;
                    ResolvedColumn to = *rhs;
                    std::string reason;
                    if (r_pk && !l_pk) {
                        reason = "right column is the primary key";
                    } else if (l_pk && !r_pk) {
                        std::swap(from, to);
                        reason = "left column is the primary key";
                    } else {
                        const bool l_distinct = column_distinct(*lhs->table, *lhs->table->column_index(lhs->column));
                        const bool r_distinct = column_distinct(*rhs->table, *rhs->table->column_index(rhs->column));
                        if (r_distinct && !l_distinct) {
                            reason = "right column has distinct values";
                        } else if (l_distinct && !r_distinct) {
                            std::swap(from, to);
                            reason = "left column has distinct values";
                        } else {
                            reason = "ambiguous direction; referencing the right operand";
                        }
                    }
                    ForeignKey fk{{from.column}, to.table->name, {to.column}, KeyOrigin::Inferred};
                    from.table->foreign_keys.push_back(fk);
                    log.actions.push_back({RepairKind::FkInferred, from.table->name, "JOIN ON " + reason, "",
                                           describe_key(from.table->name, fk.columns) + " -> " +
                                               describe_key(to.table->name, fk.referenced_columns),
                                           true});
                }
            }
        });
    }
    return {std::move(db), std::move(log)};
}

std::pair<RelationalDatabase, RepairLog> infer_primary_keys(RelationalDatabase db) {
    RepairLog log;
    for (auto& t : db.tables) {
        if (!t.primary_key.empty()) continue;
        std::vector<std::vector<std::string>> candidates;
        for (const auto& other : db.tables) {
            if (&other == &t) continue;
            for (const auto& fk : other.foreign_keys) {
                if (!iequals(fk.referenced_table, t.name)) continue;
                std::vector<std::string> cols;
                for (const auto& c : fk.referenced_columns) {
                    if (auto name = t.column_name(c)) cols.push_back(*name);
                }
                if (cols.size() == fk.referenced_columns.size() && !cols.empty() &&
                    std::find(candidates.begin(), candidates.end(), cols) == candidates.end()) {
                    candidates.push_back(std::move(cols));
                }
            }
        }
        if (candidates.empty()) {
            log.actions.push_back({RepairKind::PkInferred, t.name, "no referencing foreign key; left without primary key",
                                   "", "", false});
            continue;
        }
        auto chosen = std::find_if(candidates.begin(), candidates.end(),
                                   [&](const auto& cols) { return column_values_unique(t, cols); });
        std::string detail = "columns referenced by another table's foreign key";
        if (chosen == candidates.end()) {
            chosen = candidates.begin();
            detail += " (values not unique)";
        }
        t.primary_key = *chosen;
        log.actions.push_back({RepairKind::PkInferred, t.name, detail, "", describe_key(t.name, t.primary_key), true});
    }
    return {std::move(db), std::move(log)};
}

std::pair<RelationalDatabase, RepairLog> normalize_content(RelationalDatabase db) {
    RepairLog log;
    for (auto& t : db.tables) {
        if (t.rows.empty()) {
            if (t.columns.empty()) continue;
            t.rows.push_back(Row(t.columns.size()));
            t.placeholder = true;
            log.actions.push_back({RepairKind::EmptyTableFilled, t.name, "added one placeholder row of nulls", "0",
                                   "1", true});
            continue;
        }
        std::unordered_set<Row, RowHash> seen;
        std::vector<Row> kept;
        kept.reserve(t.rows.size());
        for (auto& row : t.rows) {
            if (seen.insert(row).second) kept.push_back(std::move(row));
        }
        const std::size_t before = t.rows.size();
        t.rows = std::move(kept);
        if (t.rows.size() != before) {
            log.actions.push_back({RepairKind::RowsDeduped, t.name,
                                   "removed " + std::to_string(before - t.rows.size()) + " duplicate rows",
                                   std::to_string(before), std::to_string(t.rows.size()), true});
        }
    }
    return {std::move(db), std::move(log)};
}

RelationalDatabase namespace_schema(RelationalDatabase db, const std::string& domain, RepairLog* log) {
    if (domain.empty()) throw InvalidDomainName("domain name is empty");
    if (domain.find('.') != std::string::npos) throw InvalidDomainName("domain name contains '.': " + domain);
    for (const auto& t : db.tables) {
        if (t.name.find('.') != std::string::npos) {
            throw InvalidDomainName("table " + t.name + " is already namespaced");
        }
    }
    for (auto& t : db.tables) {
        const std::string renamed = domain + "." + t.name;
        if (log) log->actions.push_back({RepairKind::TableRenamed, t.name, "namespaced", t.name, renamed, true});
        t.name = renamed;
        for (auto& fk : t.foreign_keys) fk.referenced_table = domain + "." + fk.referenced_table;
    }
    // Foreign keys may spell the target in a different case than the table.
    for (auto& t : db.tables) {
        for (auto& fk : t.foreign_keys) {
            if (const Table* target = db.find_table(fk.referenced_table)) fk.referenced_table = target->name;
        }
    }
    return db;
}

std::vector<std::string> replay_renames(std::vector<std::string> names, const RepairLog& log) {
    for (auto& n : names) {
        for (const auto& a : log.actions) {
            if (a.applied && a.kind == RepairKind::TableRenamed && a.before == n) {
                n = a.after;
                break;
            }
        }
    }
    return names;
}

std::pair<RelationalDatabase, RepairLog> run_repairs(RelationalDatabase db, const RepairOptions& options,
                                                     const std::vector<std::string>& workload) {
    RepairLog log;
    if (options.infer_foreign_keys) {
        auto [next, l] = infer_foreign_keys(std::move(db), workload);
        db = std::move(next);
        log.append(l);
    }
    if (options.infer_primary_keys) {
        auto [next, l] = infer_primary_keys(std::move(db));
        db = std::move(next);
        log.append(l);
    }
    if (options.normalize_content) {
        auto [next, l] = normalize_content(std::move(db));
        db = std::move(next);
        log.append(l);
    }
    if (options.domain) db = namespace_schema(std::move(db), *options.domain, &log);
    return {std::move(db), std::move(log)};
}

}  // namespace relkg
