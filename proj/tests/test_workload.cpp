#include <gtest/gtest.h>

#include "relkg/errors.hpp"
#include "relkg/exec.hpp"
#include "relkg/relational.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/workload.hpp"

using namespace relkg;

TEST(Workload, JsonlLines) {
    const auto w = parse_workload(
        "{\"db_id\": \"singer\", \"query\": \"SELECT Name FROM singer\", \"question\": \"names?\"}\n"
        "{\"db_id\": \"singer\", \"sql\": \"SELECT count(*) FROM song\"}\n",
        WorkloadFormat::Jsonl);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w.items[0].question, "names?");
    EXPECT_EQ(w.items[1].sql, "SELECT count(*) FROM song");
    EXPECT_EQ(parse_workload(to_jsonl(w), WorkloadFormat::Jsonl), w);
}

TEST(Workload, PlainSkipsBlankAndComments) {
    const auto w =
        parse_workload("SELECT a FROM t\n\n-- note\nSELECT b FROM t\n", WorkloadFormat::Plain, "db");
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w.items[1].db_id, "db");
}

TEST(Workload, Errors) {
    EXPECT_THROW(parse_workload("{not json}\n", WorkloadFormat::Jsonl), WorkloadFormatError);
    EXPECT_THROW(parse_workload("{\"db_id\": \"x\"}\n", WorkloadFormat::Jsonl), WorkloadFormatError);
    const std::set<std::string> known = {"singer"};
    EXPECT_THROW(parse_workload("{\"db_id\": \"other\", \"query\": \"SELECT 1\"}\n", WorkloadFormat::Jsonl, {}, &known),
                 WorkloadFormatError);
    EXPECT_THROW(parse_workload_format("csv"), UnsupportedFormat);
}

TEST(Generator, Deterministic) {
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const auto a = generate_random_instance(seed);
        const auto b = generate_random_instance(seed);
        EXPECT_EQ(a.db, b.db);
        EXPECT_EQ(a.workload, b.workload);
    }
    EXPECT_NE(generate_random_instance(1).workload, generate_random_instance(2).workload);
}

TEST(Generator, RespectsLimits) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto inst = generate_random_instance(seed, {.max_tables = 99, .max_rows = 99, .max_queries = 99});
        EXPECT_LE(inst.db.tables.size(), 5u);
        EXPECT_LE(inst.workload.size(), 50u);
        for (const auto& t : inst.db.tables) EXPECT_LE(t.rows.size(), 6u);
    }
}

TEST(Generator, CoversEverySchemaShape) {
    GeneratedShapes seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = generate_random_instance(seed).shapes;
        seen.entity_no_fk |= s.entity_no_fk;
        seen.entity_fk_not_two |= s.entity_fk_not_two;
        seen.entity_two_fk_single_pk |= s.entity_two_fk_single_pk;
        seen.linking |= s.linking;
        seen.hyperedge |= s.hyperedge;
    }
    EXPECT_TRUE(seen.entity_no_fk);
    EXPECT_TRUE(seen.entity_fk_not_two);
    EXPECT_TRUE(seen.entity_two_fk_single_pk);
    EXPECT_TRUE(seen.linking);
    EXPECT_TRUE(seen.hyperedge);
}

TEST(Generator, ShapesAgreeWithClassification) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = generate_random_instance(seed);
        const auto cls = classify_tables(inst.db);
        bool linking = false;
        for (const auto& c : cls.tables) linking |= c.is_linking();
        EXPECT_EQ(linking, inst.shapes.linking) << seed;
    }
}

TEST(Generator, QueriesParseAndExecute) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = generate_random_instance(seed);
        EXPECT_FALSE(inst.workload.items.empty());
        for (const auto& it : inst.workload.items) {
            EXPECT_NO_THROW(exec_sql(inst.db, sql::parse_sql(it.sql))) << seed << ": " << it.sql;
        }
    }
}
