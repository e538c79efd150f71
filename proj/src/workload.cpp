#include "relkg/workload.hpp"

#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relkg/errors.hpp"
#include "relkg/text.hpp"

namespace relkg {

WorkloadFormat parse_workload_format(std::string_view name) {
    if (iequals(name, "jsonl")) return WorkloadFormat::Jsonl;
    if (iequals(name, "plain")) return WorkloadFormat::Plain;
    throw UnsupportedFormat("unknown workload format: " + std::string(name));
}

void check_workload_databases(const Workload& w, const std::set<std::string>& known) {
    std::set<std::string> missing;
    for (const auto& item : w.items) {
        if (!known.count(item.db_id)) missing.insert(item.db_id);
    }
    if (missing.empty()) return;
    std::vector<std::string> ids;
    for (const auto& m : missing) ids.push_back(m.empty() ? "<none>" : m);
    throw WorkloadFormatError("unknown db_id: " + join(ids, ", "));
}

Workload parse_workload(std::string_view text, WorkloadFormat format, const std::string& default_db,
                        const std::set<std::string>* known_dbs) {
    Workload w;
    w.format = format;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        if (format == WorkloadFormat::Plain) {
            if (body.starts_with("--")) continue;
            w.items.push_back({default_db, std::string(body), std::nullopt});
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw WorkloadFormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object()) throw WorkloadFormatError("line " + std::to_string(lineno) + ": expected an object");
        WorkloadItem item;
        if (j.contains("db_id") && j["db_id"].is_string()) {
            item.db_id = j["db_id"].get<std::string>();
        } else if (!default_db.empty()) {
            item.db_id = default_db;
        } else {
            throw WorkloadFormatError("line " + std::to_string(lineno) + ": missing db_id");
        }
        const char* key = j.contains("query") ? "query" : "sql";
        if (!j.contains(key) || !j[key].is_string()) {
            throw WorkloadFormatError("line " + std::to_string(lineno) + ": missing query");
        }
        item.sql = j[key].get<std::string>();
        if (j.contains("question") && j["question"].is_string()) item.question = j["question"].get<std::string>();
        w.items.push_back(std::move(item));
    }
    if (known_dbs) check_workload_databases(w, *known_dbs);
    return w;
}

Workload load_workload(const std::filesystem::path& path, WorkloadFormat format, const std::string& default_db,
                       const std::set<std::string>* known_dbs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WorkloadFormatError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_workload(buf.str(), format, default_db, known_dbs);
}

std::string to_jsonl(const Workload& w) {
    std::string out;
    for (const auto& item : w.items) {
        nlohmann::json j = {{"db_id", item.db_id}, {"query", item.sql}};
        if (item.question) j["question"] = *item.question;
        out += j.dump() + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random instances

namespace {

enum class Kind { Base, Child, Linking, Cond3, Hyper };

struct GenTable {
    std::string name;
    Kind kind = Kind::Base;
    std::vector<std::string> targets;  // referenced base tables
    std::vector<std::string> fk_cols;
};

class Generator {
public:
    Generator(std::uint64_t seed, GeneratorLimits limits) : rng_(seed), limits_(limits) {
        limits_.max_tables = std::clamp<std::size_t>(limits_.max_tables, 1, 5);
        limits_.max_rows = std::min<std::size_t>(limits_.max_rows, 6);
        limits_.max_queries = std::min<std::size_t>(limits_.max_queries, 50);
    }

    GeneratedInstance run(std::uint64_t seed) {
        GeneratedInstance out;
        out.db.name = "gen" + std::to_string(seed);
        schema();
        for (const auto& t : tables_) out.db.tables.push_back(materialize(t));
        for (const auto& t : tables_) {
            switch (t.kind) {
                case Kind::Base: out.shapes.entity_no_fk = true; break;
                case Kind::Child: out.shapes.entity_fk_not_two = true; break;
                case Kind::Linking: out.shapes.linking = true; break;
                case Kind::Cond3: out.shapes.entity_two_fk_single_pk = true; break;
                case Kind::Hyper:
                    out.shapes.entity_fk_not_two = true;
                    out.shapes.hyperedge = true;
                    break;
            }
        }
        out.workload.format = WorkloadFormat::Jsonl;
        const std::size_t n = limits_.max_queries == 0 ? 0 : pick(std::max<std::size_t>(1, limits_.max_queries / 2), limits_.max_queries);
        std::size_t guard = 0;
        while (out.workload.items.size() < n && guard++ < n * 20) {
            if (auto sql = query()) out.workload.items.push_back({out.db.name, *sql, std::nullopt});
        }
        return out;
    }

private:
    std::size_t pick(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }
    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
    template <class T>
    const T& one(const std::vector<T>& v) {
        return v[pick(0, v.size() - 1)];
    }

    void schema() {
        static const std::vector<std::string> base_names = {"alpha", "beta", "gamma"};
        const std::size_t total = pick(std::min<std::size_t>(2, limits_.max_tables), limits_.max_tables);
        const std::size_t bases = std::min<std::size_t>({total, pick(1, 3)});
        for (std::size_t i = 0; i < bases; ++i) tables_.push_back({base_names[i], Kind::Base, {}, {}});
        for (std::size_t i = bases; i < total; ++i) {
            std::vector<Kind> kinds{Kind::Child};
            if (bases >= 2) {
                kinds.push_back(Kind::Linking);
                kinds.push_back(Kind::Linking);
                kinds.push_back(Kind::Cond3);
            }
            if (bases >= 3) kinds.push_back(Kind::Hyper);
            GenTable t;
            t.kind = one(kinds);
            t.name = "d" + std::to_string(i);
            const std::size_t fks = t.kind == Kind::Child ? 1 : t.kind == Kind::Hyper ? 3 : 2;
            std::vector<std::string> pool;
            for (std::size_t b = 0; b < bases; ++b) pool.push_back(base_names[b]);
            std::shuffle(pool.begin(), pool.end(), rng_);
            for (std::size_t k = 0; k < fks; ++k) {
                t.targets.push_back(pool[k]);
                t.fk_cols.push_back(pool[k] + "_id");
            }
            tables_.push_back(std::move(t));
        }
    }

    Value maybe_null(Value v, double p = 0.15) { return chance(p) ? Value::null() : std::move(v); }

    Value name_value() {
        static const std::vector<std::string> names = {"ann", "bob", "cara", "dan", "Ann", "al", "bea", "cab"};
        return maybe_null(Value::text(one(names)));
    }

    Table materialize(const GenTable& g) {
        Table t;
        t.name = g.name;
        const std::size_t rows = pick(0, limits_.max_rows);
        auto pk_pool = [&](const std::string& target) {
            std::vector<std::int64_t> ids;
            for (const auto& r : rows_of_[target]) ids.push_back(r);
            return ids;
        };
        switch (g.kind) {
            case Kind::Base: {
                t.columns = {{"id", TypeTag::Int}, {"v", TypeTag::Int}, {"name", TypeTag::Text}};
                t.primary_key = {"id"};
                std::vector<std::int64_t> ids;
                for (std::int64_t i = 1; i <= 9; ++i) ids.push_back(i);
                std::shuffle(ids.begin(), ids.end(), rng_);
                ids.resize(rows);
                std::sort(ids.begin(), ids.end());
                for (auto id : ids) {
                    t.rows.push_back({Value::integer(id), maybe_null(Value::integer(static_cast<std::int64_t>(pick(0, 5)))),
                                      name_value()});
                }
                rows_of_[g.name] = ids;
                break;
            }
            case Kind::Linking: {
                t.columns = {{g.fk_cols[0], TypeTag::Int}, {g.fk_cols[1], TypeTag::Int}, {"w", TypeTag::Int}};
                t.primary_key = {g.fk_cols[0], g.fk_cols[1]};
                const auto as = pk_pool(g.targets[0]);
                const auto bs = pk_pool(g.targets[1]);
                std::set<std::pair<std::int64_t, std::int64_t>> seen;
                for (std::size_t r = 0; r < rows && !as.empty() && !bs.empty(); ++r) {
                    const auto a = one(as);
                    const auto b = one(bs);
                    if (!seen.insert({a, b}).second) continue;
                    t.rows.push_back({Value::integer(a), Value::integer(b),
                                      maybe_null(Value::integer(static_cast<std::int64_t>(pick(0, 3))))});
                }
                break;
            }
            case Kind::Child:
            case Kind::Cond3:
            case Kind::Hyper: {
                t.columns = {{"id", TypeTag::Int}};
                for (const auto& c : g.fk_cols) t.columns.push_back({c, TypeTag::Int});
                t.columns.push_back({"v", TypeTag::Int});
                t.columns.push_back({"name", TypeTag::Text});
                // Hyperedge tables sometimes go without a key (still an entity).
                if (g.kind != Kind::Hyper || chance(0.5)) t.primary_key = {"id"};
                for (std::size_t r = 0; r < rows; ++r) {
                    Row row{Value::integer(static_cast<std::int64_t>(r + 1))};
                    for (const auto& target : g.targets) {
                        const auto ids = pk_pool(target);
                        row.push_back(ids.empty() || chance(0.15) ? Value::null() : Value::integer(one(ids)));
                    }
                    row.push_back(maybe_null(Value::integer(static_cast<std::int64_t>(pick(0, 5)))));
                    row.push_back(name_value());
                    t.rows.push_back(std::move(row));
                }
                break;
            }
        }
        for (std::size_t k = 0; k < g.targets.size(); ++k) {
            t.foreign_keys.push_back({{g.fk_cols[k]}, g.targets[k], {"id"}, KeyOrigin::Declared});
        }
        return t;
    }

    // -- identifier spelling ------------------------------------------------

    std::string id(const std::string& s) {
        switch (pick(0, 3)) {
            case 0: return to_upper(s);
            case 1: {
                std::string out = s;
                out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
                return out;
            }
            default: return s;
        }
    }

    std::vector<const GenTable*> of_kind(std::initializer_list<Kind> kinds) const {
        std::vector<const GenTable*> out;
        for (const auto& t : tables_) {
            if (std::find(kinds.begin(), kinds.end(), t.kind) != kinds.end()) out.push_back(&t);
        }
        return out;
    }

    std::string cmp_op() { return one(std::vector<std::string>{"=", ">", "<", ">=", "<=", "!="}); }
    std::string small() { return std::to_string(pick(0, 5)); }
    std::string like_pattern() {
        return "'" + one(std::vector<std::string>{"a%", "%a%", "%n", "A%", "b_b", "%a_%", "c%b"}) + "'";
    }
    std::string agg(const std::string& col) {
        const std::string fn = one(std::vector<std::string>{"count", "max", "min", "sum", "avg"});
        return id(fn) + "(" + col + ")";
    }

    /// An entity table with v/name columns and its key.
    const GenTable* entity() { return one(of_kind({Kind::Base, Kind::Child, Kind::Cond3, Kind::Hyper})); }

    std::string where_on(const std::string& q) {
        switch (pick(0, 5)) {
            case 0: return q + id("v") + " " + cmp_op() + " " + small();
            case 1: return q + id("name") + (chance(0.3) ? " NOT LIKE " : " LIKE ") + like_pattern();
            case 2: return q + id("v") + (chance(0.3) ? " NOT IN (" : " IN (") + small() + ", " + small() + ")";
            case 3: return q + id("name") + (chance(0.5) ? " IS NULL" : " IS NOT NULL");
            case 4: return q + id("v") + " BETWEEN 1 AND 3";
            default:
                return "(" + q + id("v") + " " + cmp_op() + " " + small() + " OR " + q + id("name") + " = 'ann')";
        }
    }

    std::optional<std::string> query() {
        const auto children = of_kind({Kind::Child, Kind::Cond3, Kind::Hyper});
        const auto links = of_kind({Kind::Linking});
        switch (pick(0, 17)) {
            case 0: {  // filter + projection
                const GenTable* t = entity();
                return "SELECT " + id("name") + ", " + id("v") + " FROM " + id(t->name) + " WHERE " + where_on("");
            }
            case 1: {  // aggregates without grouping
                const GenTable* t = entity();
                std::string sql = "SELECT " + id("count") + "(*), " + agg(id("v")) + " FROM " + id(t->name);
                if (chance(0.5)) sql += " WHERE " + where_on("");
                return sql;
            }
            case 2: {  // grouping on a text column
                const GenTable* t = entity();
                std::string sql = "SELECT " + id("name") + ", " + id("count") + "(*) FROM " + id(t->name) + " GROUP BY " + id("name");
                if (chance(0.5)) sql += " HAVING " + id("count") + "(*) > 1";
                if (chance(0.5)) sql += " ORDER BY " + id("count") + "(*) DESC, " + id("name");
                return sql;
            }
            case 3: {  // ordering with a window
                const GenTable* t = entity();
                return "SELECT " + id("id") + ", " + id("name") + " FROM " + id(t->name) + " ORDER BY " + id("v") +
                       (chance(0.5) ? " DESC" : "") + ", " + id("id") + " LIMIT " + std::to_string(pick(1, 3)) +
                       (chance(0.5) ? " OFFSET " + std::to_string(pick(0, 2)) : "");
            }
            case 4: {  // DISTINCT
                const GenTable* t = entity();
                return "SELECT DISTINCT " + id("v") + " FROM " + id(t->name) + " ORDER BY " + id("v");
            }
            case 5:
            case 6: {  // join along an entity key
                if (children.empty()) return std::nullopt;
                const GenTable* c = one(children);
                const std::size_t k = pick(0, c->targets.size() - 1);
                std::string sql = "SELECT T1." + id("name") + ", T2." + id("v") + " FROM " + id(c->targets[k]) + " AS T1 JOIN " +
                                  id(c->name) + " AS T2 ON T1." + id("id") + " = T2." + id(c->fk_cols[k]);
                if (chance(0.5)) sql += " WHERE " + where_on("T2.");
                return sql;
            }
            case 7: {  // grouped join with a bare column determined by the key
                if (children.empty()) return std::nullopt;
                const GenTable* c = one(children);
                const std::size_t k = pick(0, c->targets.size() - 1);
                std::string sql = "SELECT T1." + id("id") + ", T1." + id("name") + ", " + id("count") + "(*) FROM " +
                                  id(c->name) + " AS T2 JOIN " + id(c->targets[k]) + " AS T1 ON T1." + id("id") + " = T2." +
                                  id(c->fk_cols[k]) + " GROUP BY T1." + id("id");
                if (chance(0.5)) sql += " HAVING " + id("count") + "(*) >= 2";
                return sql;
            }
            case 8:
            case 9: {  // through a linking table
                if (links.empty()) return std::nullopt;
                const GenTable* l = one(links);
                std::string sql = "SELECT T1." + id("name") + ", T3." + id("name") + ", T2." + id("w") + " FROM " +
                                  id(l->targets[0]) + " AS T1 JOIN " + id(l->name) + " AS T2 ON T1." + id("id") + " = T2." +
                                  id(l->fk_cols[0]) + " JOIN " + id(l->targets[1]) + " AS T3 ON T2." + id(l->fk_cols[1]) +
                                  " = T3." + id("id");
                if (chance(0.5)) sql += " WHERE T2." + id("w") + " > 0";
                return sql;
            }
            case 10: {  // linking table alone, key columns read through endpoints
                if (links.empty()) return std::nullopt;
                const GenTable* l = one(links);
                return "SELECT " + id(l->fk_cols[chance(0.5) ? 0 : 1]) + ", " + id("w") + " FROM " + id(l->name) +
                       (chance(0.5) ? " WHERE " + id("w") + " >= 1" : "");
            }
            case 11: {  // negation over a key
                std::vector<std::pair<const GenTable*, std::size_t>> refs;
                for (const auto* t : of_kind({Kind::Child, Kind::Cond3, Kind::Hyper, Kind::Linking})) {
                    for (std::size_t k = 0; k < t->targets.size(); ++k) refs.emplace_back(t, k);
                }
                if (refs.empty()) return std::nullopt;
                const auto [t, k] = one(refs);
                return "SELECT " + id("name") + " FROM " + id(t->targets[k]) + " WHERE " + id("id") + " NOT IN (SELECT " +
                       id(t->fk_cols[k]) + " FROM " + id(t->name) + ")";
            }
            case 12: {  // IN subquery
                if (children.empty()) return std::nullopt;
                const GenTable* c = one(children);
                const std::size_t k = pick(0, c->targets.size() - 1);
                return "SELECT " + id("name") + " FROM " + id(c->targets[k]) + " WHERE " + id("id") + " IN (SELECT " +
                       id(c->fk_cols[k]) + " FROM " + id(c->name) + " WHERE " + where_on("") + ")";
            }
            case 13: {  // scalar subquery
                const GenTable* t = entity();
                const GenTable* u = entity();
                return "SELECT " + id("id") + " FROM " + id(t->name) + " WHERE " + id("v") + " > (SELECT " +
                       id(one(std::vector<std::string>{"avg", "min", "max"})) + "(" + id("v") + ") FROM " + id(u->name) + ")";
            }
            case 14: {  // UNION
                const GenTable* a = entity();
                const GenTable* b = entity();
                return "SELECT " + id("name") + " FROM " + id(a->name) + " WHERE " + where_on("") +
                       (chance(0.3) ? " UNION ALL " : " UNION ") + "SELECT " + id("name") + " FROM " + id(b->name);
            }
            case 15: {  // comma join with the key in WHERE
                if (children.empty()) return std::nullopt;
                const GenTable* c = one(children);
                const std::size_t k = pick(0, c->targets.size() - 1);
                return "SELECT T2." + id("id") + ", T1." + id("v") + " FROM " + id(c->targets[k]) + " AS T1, " + id(c->name) +
                       " AS T2 WHERE T1." + id("id") + " = T2." + id(c->fk_cols[k]) + " AND T1." + id("v") + " " + cmp_op() +
                       " " + small();
            }
            case 16: {  // join on a non-key column
                const GenTable* a = entity();
                const GenTable* b = entity();
                if (a == b) return std::nullopt;
                return "SELECT T1." + id("id") + ", T2." + id("id") + " FROM " + id(a->name) + " AS T1 JOIN " + id(b->name) +
                       " AS T2 ON T1." + id("v") + " = T2." + id("v");
            }
            default: {  // aggregate over a group with an aggregate ORDER BY
                const GenTable* t = entity();
                return "SELECT " + id("v") + ", " + agg(id("id")) + " FROM " + id(t->name) + " GROUP BY " + id("v") +
                       " ORDER BY " + id("v");
            }
        }
    }

    std::mt19937_64 rng_;
    GeneratorLimits limits_;
    std::vector<GenTable> tables_;
    std::map<std::string, std::vector<std::int64_t>> rows_of_;
};

}  // namespace

GeneratedInstance generate_random_instance(std::uint64_t seed, GeneratorLimits limits) {
    return Generator(seed, limits).run(seed);
}

}  // namespace relkg
