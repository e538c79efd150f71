#include <algorithm>
#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

#include "relkg/binding.hpp"
#include "relkg/errors.hpp"
#include "relkg/eval.hpp"
#include "relkg/sql2cypher.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/text.hpp"

namespace relkg {

double execution_accuracy(const std::vector<QueryOutcome>& outcomes) {
    std::size_t n = 0;
    std::size_t matches = 0;
    for (const auto& o : outcomes) {
        if (!o.counted()) continue;
        ++n;
        if (o.match) ++matches;
    }
    if (n == 0) throw EmptyWorkload();
    return static_cast<double>(matches) / static_cast<double>(n);
}

double valid_score(const std::vector<QueryOutcome>& outcomes, std::size_t n_parse_failures) {
    std::size_t n = 0;
    std::size_t matches = 0;
    for (const auto& o : outcomes) {
        if (!o.counted()) continue;
        ++n;
        if (o.match) ++matches;
    }
    const std::size_t denom = n + n_parse_failures;
    return denom == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(denom);
}

nlohmann::json QueryOutcome::to_json() const {
    nlohmann::json j = {{"db_id", db_id}, {"sql", sql}, {"parsed", parsed}, {"match", match}, {"counted", counted()}};
    if (!parse_error.empty()) j["parse_error"] = parse_error;
    if (sql_failed) j["sql_error"] = sql_error;
    if (cypher) j["cypher"] = *cypher;
    if (!failure.empty()) j["failure"] = failure;
    if (r_sql) j["r_sql"] = r_sql->to_json();
    if (r_cyp) j["r_cyp"] = r_cyp->to_json();
    if (!tags.empty()) j["tags"] = tags;
    if (excluded) j["excluded"] = true;
    return j;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [db, m] : per_database) {
        per[db] = {{"N", m.n}, {"matches", m.matches}, {"N_F_sql", m.parse_failures}, {"excluded", m.excluded}, {"EA", m.ea}};
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& o : outcomes) out.push_back(o.to_json());
    return {{"N", n},
            {"N_F_sql", n_parse_failures},
            {"matches", matches},
            {"excluded", excluded},
            {"sql_failures", sql_failures},
            {"EA", ea},
            {"VS", vs},
            {"strict", strict},
            {"per_database", per},
            {"divergence_tags", divergence_tags},
            {"outcomes", out}};
}

std::string MetricsReport::to_text() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "database                       N  match  N_F_sql  tagged      EA\n";
    for (const auto& [db, m] : per_database) {
        out << std::left << std::setw(28) << db << std::right << std::setw(4) << m.n << std::setw(7) << m.matches
            << std::setw(9) << m.parse_failures << std::setw(8) << m.excluded << std::setw(8) << m.ea << "\n";
    }
    out << "total: N=" << n << " matches=" << matches << " N_F_sql=" << n_parse_failures << " EA=" << ea
        << " VS=" << vs << (strict ? " (strict)" : "") << "\n";
    if (excluded) out << "excluded as known divergences: " << excluded << "\n";
    if (sql_failures) out << "SQL execution failures (not counted): " << sql_failures << "\n";
    for (const auto& [tag, count] : divergence_tags) out << "  tag " << tag << ": " << count << "\n";
    for (const auto& o : outcomes) {
        if (!o.parsed || o.match) continue;
        out << "- [" << o.db_id << "] " << o.sql << "\n";
        if (o.sql_failed) {
            out << "    sql error: " << o.sql_error << "\n";
            continue;
        }
        if (o.cypher) out << "    cypher: " << *o.cypher << "\n";
        if (!o.failure.empty()) out << "    failure: " << o.failure << "\n";
        if (!o.tags.empty()) out << "    tags: " << join(o.tags, ", ") << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Divergence tags

namespace {

struct TagScan {
    const RelationalDatabase& db;
    bool not_in = false;
    bool not_in_null = false;
    bool has_sum = false;
    bool limit_without_order = false;
    bool implicit_group_order = false;
    bool top_window = false;
    std::set<std::string> tables;

    const Table* table_of(const sql::Select& s, const sql::ColumnRef& r) const {
        for (const auto& f : s.from) {
            if (iequals(f.table.binding_name(), r.table)) return db.find_table(f.table.name);
        }
        return nullptr;
    }

    bool column_has_null(const sql::Select& s, const sql::Expr& e) const {
        if (!e.is<sql::ColumnRef>()) return false;
        const auto& r = e.as<sql::ColumnRef>();
        const Table* t = table_of(s, r);
        if (!t) return false;
        auto idx = t->column_index(r.column);
        if (!idx) return false;
        return std::any_of(t->rows.begin(), t->rows.end(), [&](const Row& row) { return row[*idx].is_null(); });
    }

    void expr(const sql::Select& s, const sql::Expr& e) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, sql::Aggregate>) {
                    if (n.fn == sql::AggFn::Sum) has_sum = true;
                    if (n.arg) expr(s, **n.arg);
                } else if constexpr (std::is_same_v<T, sql::InList>) {
                    if (n.negated) {
                        not_in = true;
                        if (column_has_null(s, *n.operand)) not_in_null = true;
                        for (const auto& i : n.items) {
                            if (i.template is<sql::Literal>() && i.template as<sql::Literal>().value.is_null()) {
                                not_in_null = true;
                            }
                        }
                    }
                    expr(s, *n.operand);
                } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
                    if (n.negated) {
                        not_in = true;
                        if (column_has_null(s, *n.operand)) not_in_null = true;
                        try {
                            const ResultSet inner = exec_sql(db, *n.subquery);
                            for (const auto& row : inner.rows) {
                                if (!row.empty() && row.front().is_null()) not_in_null = true;
                            }
                        } catch (const Error&) {
                            // Correlated inner query: judge by the operand only.
                        }
                    }
                    expr(s, *n.operand);
                    select(*n.subquery, false);
                } else if constexpr (std::is_same_v<T, sql::ScalarSubquery>) {
                    select(*n.subquery, false);
                } else if constexpr (std::is_same_v<T, sql::Comparison> || std::is_same_v<T, sql::And> ||
                                     std::is_same_v<T, sql::Or>) {
                    expr(s, *n.lhs);
                    expr(s, *n.rhs);
                } else if constexpr (std::is_same_v<T, sql::Like>) {
                    expr(s, *n.operand);
                } else if constexpr (std::is_same_v<T, sql::IsNull> || std::is_same_v<T, sql::Not>) {
                    expr(s, *n.operand);
                }
            },
            e.node);
    }

    void select(const sql::Select& s, bool top) {
        for (const auto& f : s.from) tables.insert(f.table.name);
        const bool window = s.limit.has_value() || s.offset.has_value();
        if (top && window) top_window = true;
        if (window && s.order_by.empty()) {
            if (s.group_by.empty()) {
                limit_without_order = true;
            } else {
                implicit_group_order = true;
            }
        }
        for (const auto& i : s.items) {
            if (i.expr) expr(s, *i.expr);
        }
        for (const auto& f : s.from) {
            if (f.on) expr(s, *f.on);
        }
        if (s.where) expr(s, *s.where);
        if (s.having) expr(s, *s.having);
        for (const auto& o : s.order_by) expr(s, o.expr);
        if (s.union_with) select(*s.union_with->next, false);
    }
};

}  // namespace

std::vector<std::string> divergence_tags(const Migration& m, const sql::Select& tree, const ResultSet& r_sql,
                                         const std::optional<ResultSet>& r_cyp) {
    sql::Select bound;
    try {
        bound = normalize_identifiers(tree, SchemaBinding::from_database(m.original));
    } catch (const Error&) {
        return {};
    }
    TagScan scan{m.original};
    scan.select(bound, true);

    std::vector<std::string> tags;
    auto renamed = [&](const std::string& t) { return replay_renames({t}, m.repairs).front(); };
    for (const auto& t : scan.tables) {
        if (m.repairs.rows_removed(t) > 0) {
            tags.push_back("dedup");
            break;
        }
    }
    for (const auto& t : scan.tables) {
        if (m.build.orphans_in(renamed(t)) > 0) {
            tags.push_back("orphan_fk");
            break;
        }
    }
    if (scan.not_in_null) tags.push_back("not_in_null");
    if (r_sql.has_ties && r_cyp) {
        ResultSet a = r_sql;
        ResultSet b = *r_cyp;
        a.ordered = b.ordered = false;
        if (scan.top_window || compare_results(a, b)) tags.push_back("order_tie");
    }
    if (scan.implicit_group_order) tags.push_back("implicit_group_order");
    if (scan.limit_without_order) tags.push_back("limit_without_order");
    if (scan.has_sum && r_cyp && compare_results_null_as_zero(r_sql, *r_cyp)) tags.push_back("sum_of_empty");
    return tags;
}

// ---------------------------------------------------------------------------
// Evaluation

QueryOutcome evaluate_query(const Migration& m, const std::string& db_id, const std::string& sql, bool strict) {
    QueryOutcome o;
    o.db_id = db_id;
    o.sql = sql;
    auto parsed = sql::try_parse_sql(sql);
    if (auto* err = std::get_if<ParseError>(&parsed)) {
        o.parse_error = err->what();
        return o;
    }
    o.parsed = true;
    const sql::Select& tree = std::get<sql::Select>(parsed);
    try {
        o.r_sql = exec_sql(m.original, tree);
    } catch (const Error& e) {
        o.sql_failed = true;
        o.sql_error = e.what();
        return o;
    }
    try {
        const cypher::CypherQuery q = translate(rename_tables(tree, m.renames()), m.classification);
        o.cypher = cypher::render_cypher(q);
        o.r_cyp = exec_cypher(m.graph, q);
        o.match = compare_results(*o.r_sql, *o.r_cyp);
    } catch (const Error& e) {
        o.failure = e.what();
    }
    if (!o.match && o.r_cyp) {
        o.tags = divergence_tags(m, tree, *o.r_sql, o.r_cyp);
        o.excluded = !strict && !o.tags.empty();
    }
    return o;
}

MetricsReport evaluate_workload(const std::map<std::string, const Migration*>& dbs, const Workload& workload,
                                const EvalOptions& options) {
    std::set<std::string> known;
    for (const auto& [id, _] : dbs) known.insert(id);
    check_workload_databases(workload, known);

    std::vector<QueryOutcome> outcomes(workload.items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < outcomes.size(); i = next++) {
            const auto& item = workload.items[i];
            outcomes[i] = evaluate_query(*dbs.at(item.db_id), item.db_id, item.sql, options.strict);
        }
    };
    const unsigned jobs = std::clamp<unsigned>(options.jobs, 1, 64);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    MetricsReport r;
    r.strict = options.strict;
    for (const auto& o : outcomes) {
        auto& per = r.per_database[o.db_id];
        if (!o.parsed) {
            ++r.n_parse_failures;
            ++per.parse_failures;
            continue;
        }
        if (o.sql_failed) {
            ++r.sql_failures;
            continue;
        }
        for (const auto& t : o.tags) ++r.divergence_tags[t];
        if (o.excluded) {
            ++r.excluded;
            ++per.excluded;
            continue;
        }
        ++r.n;
        ++per.n;
        if (o.match) {
            ++r.matches;
            ++per.matches;
        }
    }
    for (auto& [_, per] : r.per_database) per.ea = per.n ? static_cast<double>(per.matches) / static_cast<double>(per.n) : 0.0;
    r.ea = execution_accuracy(outcomes);
    r.vs = valid_score(outcomes, r.n_parse_failures);
    r.outcomes = std::move(outcomes);
    return r;
}

}  // namespace relkg
