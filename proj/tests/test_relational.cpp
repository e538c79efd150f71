#include <random>

#include <gtest/gtest.h>

#include "relkg/errors.hpp"
#include "relkg/loaders.hpp"
#include "relkg/relational.hpp"
#include "support/fixtures.hpp"

using namespace relkg;

namespace {

const char* kMusicalDump = R"(
CREATE TABLE "musical" (
"Musical_ID" int,
"Name" text,
PRIMARY KEY ("Musical_ID")
);
CREATE TABLE "actor" (
"Actor_ID" int,
"Name" text,
"Musical_ID" int,
PRIMARY KEY ("Actor_ID"),
FOREIGN KEY ("Musical_ID") REFERENCES "actor"("Actor_ID")
);
)";

Table make_table(const std::string& name, std::size_t n_fk, std::size_t n_pk) {
    Table t;
    t.name = name;
    for (std::size_t i = 0; i < std::max<std::size_t>(n_fk, n_pk) + 1; ++i) t.columns.push_back({"c" + std::to_string(i)});
    for (std::size_t i = 0; i < n_pk; ++i) t.primary_key.push_back("c" + std::to_string(i));
    for (std::size_t i = 0; i < n_fk; ++i) t.foreign_keys.push_back({{"c" + std::to_string(i)}, "target", {"id"}});
    return t;
}

}  // namespace

TEST(SqlDump, MusicalActorListing) {
    const auto db = load_sql_dump(kMusicalDump);
    ASSERT_EQ(db.tables.size(), 2u);
    const Table* actor = db.find_table("actor");
    ASSERT_NE(actor, nullptr);
    ASSERT_EQ(actor->foreign_keys.size(), 1u);
    EXPECT_EQ(actor->foreign_keys[0].columns, std::vector<std::string>{"Musical_ID"});
    EXPECT_EQ(actor->foreign_keys[0].referenced_table, "actor");
    EXPECT_EQ(actor->foreign_keys[0].referenced_columns, std::vector<std::string>{"Actor_ID"});
    EXPECT_EQ(actor->foreign_keys[0].origin, KeyOrigin::Declared);
}

TEST(SqlDump, EmptyScript) { EXPECT_TRUE(load_sql_dump("").tables.empty()); }

TEST(SqlDump, DuplicateInsertsKept) {
    const auto db = load_sql_dump("CREATE TABLE t(a int, PRIMARY KEY(a)); INSERT INTO t VALUES (1),(1);");
    ASSERT_EQ(db.tables.size(), 1u);
    EXPECT_EQ(db.tables[0].rows.size(), 2u);
    EXPECT_EQ(db.tables[0].primary_key, std::vector<std::string>{"a"});
}

TEST(SqlDump, MalformedCreateThrows) {
    EXPECT_THROW(load_sql_dump("CREATE TABLE t (a int, PRIMARY KEY (a);"), DumpSyntaxError);
}

TEST(SqlDump, UnsupportedStatementsBecomeWarnings) {
    const auto db = load_sql_dump("CREATE TABLE t(a int); CREATE INDEX i ON t(a); INSERT INTO t VALUES (1);");
    EXPECT_EQ(db.tables.size(), 1u);
    EXPECT_FALSE(db.warnings.empty());
    EXPECT_EQ(db.tables[0].rows.size(), 1u);
}

TEST(SqlDump, LiteralTyping) {
    const auto db = load_sql_dump("CREATE TABLE t(a, b, c, d); INSERT INTO t VALUES (1, 2.5, 'it''s', NULL);");
    const Row& r = db.tables[0].rows.at(0);
    EXPECT_EQ(r[0].kind(), ValueKind::Integer);
    EXPECT_EQ(r[1].kind(), ValueKind::Float);
    EXPECT_EQ(r[2], Value::text("it's"));
    EXPECT_TRUE(r[3].is_null());
}

TEST(SqlDump, Deterministic) {
    const std::string text = fixtures::read(fixtures::dir("college_3") / "schema.sql");
    EXPECT_EQ(load_sql_dump(text, "x"), load_sql_dump(text, "x"));
}

TEST(Manifest, AddsFacultyPrimaryKey) {
    const auto raw = load_sql_dump(fixtures::read(fixtures::dir("college_3") / "schema.sql"));
    ASSERT_TRUE(raw.find_table("Faculty")->primary_key.empty());
    const auto db = fixtures::database("college_3");
    EXPECT_EQ(db.find_table("Faculty")->primary_key, std::vector<std::string>{"FacID"});
}

TEST(Manifest, EmptyManifestIsIdentity) {
    const auto db = load_sql_dump(kMusicalDump);
    EXPECT_EQ(apply_manifest(db, Manifest{}), db);
}

TEST(Manifest, UnknownColumnThrows) {
    Manifest m;
    m.foreign_keys.push_back({"actor", "Nope", "musical", "Musical_ID"});
    EXPECT_THROW(apply_manifest(load_sql_dump(kMusicalDump), m), ManifestMismatch);
}

TEST(Manifest, SpiderIndexForm) {
    const auto doc = nlohmann::json::parse(R"({
        "db_id": "m",
        "table_names_original": ["musical", "actor"],
        "column_names_original": [[-1, "*"], [0, "Musical_ID"], [0, "Name"], [1, "Actor_ID"], [1, "Name"], [1, "Musical_ID"]],
        "primary_keys": [1, 3],
        "foreign_keys": [[5, 1]]
    })");
    const Manifest m = parse_manifest(doc);
    const auto db = apply_manifest(load_sql_dump(kMusicalDump), m);
    const auto& fk = db.find_table("actor")->foreign_keys;
    ASSERT_EQ(fk.size(), 1u);
    EXPECT_EQ(fk[0].referenced_table, "musical");
    EXPECT_EQ(fk[0].origin, KeyOrigin::Manifest);
}

TEST(Csv, QuotedFields) {
    const auto rows = parse_csv("a,b\n1,\"x, \"\"y\"\"\"\n");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][1], "x, \"y\"");
}

TEST(Classification, CollegeTables) {
    const auto db = fixtures::database("college_3");
    const auto cls = classify_tables(db);
    EXPECT_EQ(cls.find("Faculty")->kind, TableKind::Entity);
    EXPECT_EQ(cls.find("Department")->kind, TableKind::Entity);
    EXPECT_EQ(cls.find("Member_of")->kind, TableKind::Linking);
    const TableClass* enrolled = cls.find("Enrolled_in");
    EXPECT_EQ(enrolled->kind, TableKind::Entity);
    EXPECT_EQ(enrolled->reason, ClassReason::ForeignKeyCountNotTwo);
    EXPECT_EQ(enrolled->foreign_keys.size(), 3u);
    const TableClass* course = cls.find("Course");
    EXPECT_EQ(course->kind, TableKind::Entity);
    EXPECT_EQ(course->reason, ClassReason::TwoForeignKeysSinglePk);
}

TEST(Classification, Idempotent) {
    const auto db = fixtures::database("college_3");
    EXPECT_EQ(classify_tables(db), classify_tables(db));
}

TEST(Classification, TruthTable) {
    // Exhaustive over the small range: fk in 0..5, pk in 0..3.
    for (std::size_t fk = 0; fk <= 5; ++fk) {
        for (std::size_t pk = 0; pk <= 3; ++pk) {
            const bool entity = is_entity_table(fk, pk);
            const bool linking = is_linking_table(fk, pk);
            EXPECT_NE(entity, linking) << fk << " " << pk;
            EXPECT_EQ(linking, fk == 2 && pk != 1) << fk << " " << pk;
        }
    }
}

TEST(Classification, RandomizedSchemasPartition) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t fk = rng() % 6;
        const std::size_t pk = rng() % 4;
        RelationalDatabase db;
        db.tables.push_back(make_table("target", 0, 1));
        db.tables[0].columns.push_back({"id"});
        db.tables.push_back(make_table("t", fk, pk));
        const auto cls = classify_tables(db);
        ASSERT_EQ(cls.tables.size(), 2u);
        const TableClass* c = cls.find("t");
        ASSERT_NE(c, nullptr);
        EXPECT_EQ(c->is_linking(), fk == 2 && pk != 1);
        EXPECT_EQ(c->foreign_keys.size(), fk);
    }
}

TEST(Classification, HasEdgeType) { EXPECT_EQ(has_edge_type("Student", "Enrolled_in"), "Student_HAS_Enrolled_in"); }

TEST(Merge, SameNamedTablesUnion) {
    const auto merged = merge_databases({fixtures::database("singer"), fixtures::database("concert_singer")}, "all");
    const Table* singer = merged.find_table("singer");
    ASSERT_NE(singer, nullptr);
    EXPECT_EQ(singer->rows.size(), 14u);
    EXPECT_TRUE(singer->has_column("Citizenship"));
    EXPECT_TRUE(singer->has_column("Country"));
}
