#include <set>

#include <gtest/gtest.h>

#include "relkg/errors.hpp"
#include "relkg/loaders.hpp"
#include "relkg/repair.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/text.hpp"
#include "support/fixtures.hpp"

using namespace relkg;

namespace {

const ForeignKey* key_on(const Table& t, std::string_view column) {
    for (const auto& fk : t.foreign_keys) {
        if (fk.columns.size() == 1 && iequals(fk.columns[0], column)) return &fk;
    }
    return nullptr;
}

}  // namespace

TEST(PrimaryKeys, StadiumInferredFromConcertKey) {
    auto [db, log] = infer_primary_keys(fixtures::database("concert_singer"));
    const Table* stadium = db.find_table("stadium");
    EXPECT_EQ(stadium->primary_key, std::vector<std::string>{"Stadium_ID"});
    EXPECT_EQ(log.count(RepairKind::PkInferred, "stadium"), 1u);
    // The inferred key really is unique.
    std::set<Value> seen;
    for (const auto& r : stadium->rows) EXPECT_TRUE(seen.insert(r[*stadium->column_index("Stadium_ID")]).second);
}

TEST(PrimaryKeys, NoCandidateLeftAlone) {
    auto [db, log] = infer_primary_keys(load_sql_dump("CREATE TABLE t(a int, b int);"));
    EXPECT_TRUE(db.tables[0].primary_key.empty());
    ASSERT_EQ(log.actions.size(), 1u);
    EXPECT_FALSE(log.actions[0].applied);
}

TEST(PrimaryKeys, ExistingKeyUntouched) {
    const auto in = fixtures::database("singer");
    auto [db, log] = infer_primary_keys(in);
    EXPECT_EQ(db, in);
    EXPECT_EQ(log.count(RepairKind::PkInferred), 0u);
}

TEST(ForeignKeys, MusicalActorRetarget) {
    auto [db, log] = infer_foreign_keys(fixtures::database("musical"), {});
    const ForeignKey* fk = key_on(*db.find_table("actor"), "Musical_ID");
    ASSERT_NE(fk, nullptr);
    EXPECT_EQ(fk->referenced_table, "musical");
    EXPECT_EQ(fk->referenced_columns, std::vector<std::string>{"Musical_ID"});
    EXPECT_EQ(log.count(RepairKind::FkRetargeted, "actor"), 1u);
}

TEST(ForeignKeys, StateCodeJoinOnInference) {
    const auto sql = fixtures::workload_sql("state_code");
    auto [db, log] = infer_foreign_keys(fixtures::database("state_code"), sql);
    const ForeignKey* code = key_on(*db.find_table("FINREV_FED_17"), "state_code");
    ASSERT_NE(code, nullptr);
    EXPECT_EQ(code->referenced_table, "FINREV_FED_KEY_17");
    EXPECT_EQ(code->origin, KeyOrigin::Inferred);
    // FINREV_FED_KEY_17.State is distinct, the grade-8 table repeats states.
    const ForeignKey* state = key_on(*db.find_table("NDECoreExcel_Math_Grade8"), "state");
    ASSERT_NE(state, nullptr);
    EXPECT_EQ(state->referenced_table, "FINREV_FED_KEY_17");
    EXPECT_EQ(log.count(RepairKind::FkInferred), 2u);
}

TEST(ForeignKeys, EveryJoinPairHasAKeyAfterInference) {
    const auto sql = fixtures::workload_sql("state_code");
    auto [db, log] = infer_foreign_keys(fixtures::database("state_code"), sql);
    for (const auto& text : sql) {
        const auto tree = sql::parse_sql(text);
        for (const auto& f : tree.from) {
            if (!f.on) continue;
            for (const sql::Expr* c : sql::conjuncts(*f.on)) {
                const auto& cmp = c->as<sql::Comparison>();
                const auto& l = cmp.lhs->as<sql::ColumnRef>();
                const auto& r = cmp.rhs->as<sql::ColumnRef>();
                auto table_of = [&](const std::string& alias) {
                    for (const auto& g : tree.from) {
                        if (iequals(g.table.binding_name(), alias)) return g.table.name;
                    }
                    return std::string{};
                };
                const Table* lt = db.find_table(table_of(l.table));
                const Table* rt = db.find_table(table_of(r.table));
                const ForeignKey* a = key_on(*lt, l.column);
                const ForeignKey* b = key_on(*rt, r.column);
                const bool linked = (a && iequals(a->referenced_table, rt->name)) ||
                                    (b && iequals(b->referenced_table, lt->name));
                EXPECT_TRUE(linked) << text;
            }
        }
    }
}

TEST(ForeignKeys, UnparseableWorkloadSkipped) {
    auto [db, log] = infer_foreign_keys(fixtures::database("state_code"), {"SELEC nonsense"});
    ASSERT_EQ(log.actions.size(), 1u);
    EXPECT_FALSE(log.actions[0].applied);
    EXPECT_EQ(db, fixtures::database("state_code"));
}

TEST(Content, DedupCollapsesExactDuplicates) {
    auto db = load_sql_dump("CREATE TABLE t(a int, b text); INSERT INTO t VALUES (1,'a'),(1,'a'),(2,'b');");
    auto [out, log] = normalize_content(db);
    ASSERT_EQ(out.tables[0].rows.size(), 2u);
    EXPECT_EQ(out.tables[0].rows[0], (Row{Value::integer(1), Value::text("a")}));
    EXPECT_EQ(out.tables[0].rows[1], (Row{Value::integer(2), Value::text("b")}));
    EXPECT_EQ(log.rows_removed("t"), 1u);
}

TEST(Content, DedupIsIdempotent) {
    auto once = normalize_content(fixtures::database("assets_maintenance")).first;
    auto [twice, log] = normalize_content(once);
    EXPECT_EQ(twice, once);
    EXPECT_EQ(log.count(RepairKind::RowsDeduped), 0u);
    EXPECT_EQ(once.find_table("Skills_Required_To_Fix")->rows.size(), 6u);
}

TEST(Content, EmptyTableGetsPlaceholderRow) {
    auto [db, log] = normalize_content(load_sql_dump("CREATE TABLE t(a int, b text, c real);"));
    const Table& t = db.tables[0];
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0], (Row{Value::null(), Value::null(), Value::null()}));
    EXPECT_TRUE(t.placeholder);
    EXPECT_EQ(log.count(RepairKind::EmptyTableFilled, "t"), 1u);
}

TEST(Content, NoDuplicatesUnchanged) {
    const auto in = fixtures::database("singer");
    EXPECT_EQ(normalize_content(in).first, in);
}

TEST(Namespace, RenamesTablesAndKeys) {
    RepairLog log;
    const auto db = namespace_schema(fixtures::database("concert_singer"), "concert_singer", &log);
    const Table* singer = db.find_table("concert_singer.singer");
    ASSERT_NE(singer, nullptr);
    EXPECT_EQ(db.find_table("concert_singer.concert")->foreign_keys[0].referenced_table, "concert_singer.stadium");
    EXPECT_EQ(log.count(RepairKind::TableRenamed), 4u);
}

TEST(Namespace, PreservesRowsAndKeys) {
    const auto in = fixtures::database("concert_singer");
    const auto out = namespace_schema(in, "cs");
    ASSERT_EQ(in.tables.size(), out.tables.size());
    for (std::size_t i = 0; i < in.tables.size(); ++i) {
        EXPECT_EQ(in.tables[i].rows, out.tables[i].rows);
        EXPECT_EQ(in.tables[i].columns, out.tables[i].columns);
        EXPECT_EQ(in.tables[i].primary_key, out.tables[i].primary_key);
        EXPECT_EQ(in.tables[i].foreign_keys.size(), out.tables[i].foreign_keys.size());
    }
}

TEST(Namespace, InvalidDomains) {
    const auto db = fixtures::database("singer");
    EXPECT_THROW(namespace_schema(db, ""), InvalidDomainName);
    EXPECT_THROW(namespace_schema(db, "a.b"), InvalidDomainName);
    EXPECT_THROW(namespace_schema(namespace_schema(db, "singer"), "singer"), InvalidDomainName);
}

TEST(Namespace, ReplayReproducesNames) {
    const auto in = fixtures::database("college_3");
    auto [out, log] = run_repairs(in, RepairOptions{.domain = "college_3"});
    std::vector<std::string> names;
    for (const auto& t : in.tables) names.push_back(t.name);
    std::vector<std::string> repaired;
    for (const auto& t : out.tables) repaired.push_back(t.name);
    EXPECT_EQ(replay_renames(names, log), repaired);
}

TEST(RunRepairs, DistinctRowCountsOnlyChangeThroughLoggedPasses) {
    for (const char* name : fixtures::all) {
        const auto in = fixtures::database(name);
        auto [out, log] = run_repairs(in, {}, fixtures::workload_sql(name));
        for (const auto& t : in.tables) {
            const Table* r = out.find_table(t.name);
            ASSERT_NE(r, nullptr);
            std::set<Row> distinct(t.rows.begin(), t.rows.end());
            const std::size_t expected = t.rows.empty() ? 1 : distinct.size();
            EXPECT_EQ(r->rows.size(), expected) << name << "." << t.name;
            EXPECT_EQ(t.rows.size() - distinct.size(), log.rows_removed(t.name)) << name << "." << t.name;
        }
    }
}
