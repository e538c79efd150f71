#include <random>

#include <gtest/gtest.h>

#include "oracle/brute_match.hpp"
#include "oracle/naive_sql.hpp"
#include "relkg/build.hpp"
#include "relkg/cypher.hpp"
#include "relkg/errors.hpp"
#include "relkg/exec.hpp"
#include "relkg/loaders.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/workload.hpp"
#include "support/fixtures.hpp"

using namespace relkg;

namespace {

ResultSet rows(std::vector<Row> r, bool ordered = false) {
    ResultSet s;
    s.rows = std::move(r);
    s.ordered = ordered;
    return s;
}

Value T(const char* s) { return Value::text(s); }
Value I(std::int64_t v) { return Value::integer(v); }

ResultSet run_sql(const RelationalDatabase& db, const std::string& q) { return exec_sql(db, sql::parse_sql(q)); }

bool agrees_with_oracle(const RelationalDatabase& db, const sql::Select& tree) {
    const ResultSet a = exec_sql(db, tree);
    const ResultSet b = oracle::naive_sql(db, tree);
    // Ordered results must agree row for row, ties included.
    if (a.ordered) return b.ordered && a.rows == b.rows;
    return compare_results(a, b);
}

}  // namespace

TEST(CompareResults, Examples) {
    EXPECT_TRUE(compare_results(rows({{I(1)}, {I(2)}}), rows({{I(2)}, {I(1)}})));
    EXPECT_TRUE(compare_results(rows({{I(1)}}), rows({{Value::real(1.0)}})));
    EXPECT_FALSE(compare_results(rows({{T("a")}}), rows({{T("a")}, {T("b")}})));
    EXPECT_FALSE(compare_results(rows({{I(1)}, {I(2)}}, true), rows({{I(2)}, {I(1)}}, true)));
    EXPECT_FALSE(compare_results(rows({{I(1), I(2)}}), rows({{I(1)}})));
    EXPECT_FALSE(compare_results(rows({{I(1)}, {I(1)}}), rows({{I(1)}})));
    EXPECT_TRUE(compare_results_null_as_zero(rows({{Value::null()}}), rows({{I(0)}})));
}

TEST(ExecSql, NotInSubquery) {
    const auto r = run_sql(fixtures::database("singer"), fixtures::workload_sql("singer")[0]);
    EXPECT_TRUE(compare_results(r, rows({{T("Alice Walton")}, {T("Abigail Johnson")}})));
}

TEST(ExecSql, CountOnEmptyTable) {
    const auto db = load_sql_dump("CREATE TABLE t(a int);");
    EXPECT_EQ(run_sql(db, "SELECT count(*) FROM t").rows, (std::vector<Row>{{I(0)}}));
    EXPECT_EQ(run_sql(db, "SELECT sum(a) FROM t").rows, (std::vector<Row>{{Value::null()}}));
}

TEST(ExecSql, UnknownNameIsExecError) {
    EXPECT_THROW(run_sql(fixtures::database("singer"), "SELECT nope FROM singer"), ExecError);
}

TEST(ExecSql, NullsFirstAndStableOrder) {
    const auto db = load_sql_dump("CREATE TABLE t(a int, b text); INSERT INTO t VALUES (2,'x'),(NULL,'y'),(1,'z'),(2,'w');");
    const auto asc = run_sql(db, "SELECT b FROM t ORDER BY a");
    EXPECT_EQ(asc.rows, (std::vector<Row>{{T("y")}, {T("z")}, {T("x")}, {T("w")}}));
    EXPECT_TRUE(asc.has_ties);
    const auto desc = run_sql(db, "SELECT b FROM t ORDER BY a DESC");
    EXPECT_EQ(desc.rows, (std::vector<Row>{{T("x")}, {T("w")}, {T("z")}, {T("y")}}));
}

TEST(ExecSql, NotInWithNullInnerIsEmpty) {
    const auto db = load_sql_dump(
        "CREATE TABLE a(x int); CREATE TABLE b(y int); INSERT INTO a VALUES (1),(2); INSERT INTO b VALUES (1),(NULL);");
    EXPECT_TRUE(run_sql(db, "SELECT x FROM a WHERE x NOT IN (SELECT y FROM b)").rows.empty());
    EXPECT_EQ(run_sql(db, "SELECT x FROM a WHERE x IN (SELECT y FROM b)").rows.size(), 1u);
}

TEST(ExecSql, ThreeTableChainMatchesNestedLoops) {
    const auto db = load_sql_dump(R"(
CREATE TABLE a (id int PRIMARY KEY, v text);
CREATE TABLE b (id int PRIMARY KEY, a_id int, w int);
CREATE TABLE c (id int PRIMARY KEY, b_id int, z text);
INSERT INTO a VALUES (1,'p'),(2,'q'),(3,'r'),(4,'s'),(5,'t');
INSERT INTO b VALUES (1,1,10),(2,1,20),(3,2,30),(4,4,40),(5,9,50);
INSERT INTO c VALUES (1,1,'x'),(2,1,'y'),(3,3,'z'),(4,4,'x'),(5,5,'y');
)");
    const auto tree = sql::parse_sql(
        "SELECT a.v, b.w, c.z FROM a JOIN b ON a.id = b.a_id JOIN c ON b.id = c.b_id WHERE c.z <> 'z'");
    EXPECT_TRUE(agrees_with_oracle(db, tree));
    EXPECT_EQ(exec_sql(db, tree).rows.size(), 3u);
}

TEST(ExecSql, FixtureAnswersMatchHandComputed) {
    for (const char* name : fixtures::all) {
        const auto db = fixtures::database(name);
        const auto sql = fixtures::workload_sql(name);
        for (const auto& [i, want] : fixtures::answers(name)) {
            const auto got = run_sql(db, sql.at(i));
            EXPECT_TRUE(compare_results(got, want)) << name << " #" << i << ": " << got.to_json().dump();
        }
    }
}

TEST(ExecSql, AgreesWithOracleOnFixtures) {
    for (const char* name : fixtures::all) {
        const auto db = fixtures::database(name);
        for (const auto& q : fixtures::workload_sql(name)) {
            auto r = sql::try_parse_sql(q);
            if (!std::holds_alternative<sql::Select>(r)) continue;
            EXPECT_TRUE(agrees_with_oracle(db, std::get<sql::Select>(r))) << q;
        }
    }
}

TEST(ExecSql, AgreesWithOracleOnGenerated) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto inst = generate_random_instance(seed);
        for (const auto& it : inst.workload.items) {
            EXPECT_TRUE(agrees_with_oracle(inst.db, sql::parse_sql(it.sql))) << seed << ": " << it.sql;
        }
    }
}

TEST(ExecSql, AggregateIdentities) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::string dump = "CREATE TABLE t(g int, v int);";
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            dump += " INSERT INTO t VALUES (" + std::to_string(rng() % 3) + ", " +
                    (rng() % 5 == 0 ? std::string("NULL") : std::to_string(static_cast<int>(rng() % 21) - 10)) + ");";
        }
        const auto db = load_sql_dump(dump);
        const auto r = run_sql(db, "SELECT count(*), count(v), min(v), avg(v), max(v) FROM t GROUP BY g");
        for (const auto& row : r.rows) {
            EXPECT_GE(row[0].as_integer(), 0);
            EXPECT_LE(row[1].as_integer(), row[0].as_integer());
            if (row[1].as_integer() == 0) continue;
            EXPECT_LE(row[2].as_double(), row[3].as_double());
            EXPECT_LE(row[3].as_double(), row[4].as_double());
        }
    }
    const auto one = load_sql_dump("CREATE TABLE t(v int); INSERT INTO t VALUES (7);");
    EXPECT_EQ(run_sql(one, "SELECT sum(v) FROM t").rows, (std::vector<Row>{{I(7)}}));
}

TEST(ExecCypher, EmptyGraph) {
    PropertyGraph g;
    EXPECT_TRUE(exec_cypher(g, cypher::parse_cypher("MATCH (n:x) RETURN n.a")).rows.empty());
}

TEST(ExecCypher, UnboundVariable) {
    PropertyGraph g;
    g.add_node("x", {});
    EXPECT_THROW(exec_cypher(g, cypher::parse_cypher("MATCH (n:x) RETURN m.a")), ExecError);
}

TEST(ExecCypher, MergedSingerGraphsVsNamespaced) {
    const auto singer = fixtures::database("singer");
    const auto concert = fixtures::database("concert_singer");
    const auto q = cypher::parse_cypher("MATCH (si:singer) WHERE NOT (si:singer)-[]-(:song) RETURN si.Name");

    const auto merged = merge_databases({singer, concert}, "merged");
    const auto g = build_graph(merged, classify_tables(merged)).first;
    EXPECT_TRUE(compare_results(exec_cypher(g, q),
                                rows({{T("Justin Brown")}, {T("Alice Walton")}, {T("Abigail Johnson")}})));

    const auto ns = merge_databases({namespace_schema(singer, "singer"), namespace_schema(concert, "concert_singer")}, "ns");
    const auto gn = build_graph(ns, classify_tables(ns)).first;
    const auto qn = cypher::parse_cypher(
        "MATCH (si:`singer.singer`) WHERE NOT (si:`singer.singer`)-[]-(:`singer.song`) RETURN si.Name");
    EXPECT_TRUE(compare_results(exec_cypher(gn, qn), rows({{T("Alice Walton")}, {T("Abigail Johnson")}})));
}

TEST(ExecCypher, DepartmentManagementAnswers) {
    const auto m = fixtures::migrate("department_management");
    const auto ex1 = cypher::parse_cypher(
        "MATCH (T1:department)-[T2:management]-() WITH T1.Department_ID AS id, T1.Name AS name, count(*) AS c "
        "WHERE c > 1 RETURN id, name, c");
    EXPECT_TRUE(compare_results(exec_cypher(m.graph, ex1), rows({{I(2), T("Treasury"), I(2)}})));
    const auto ex2 =
        cypher::parse_cypher("MATCH (T1:department) WHERE NOT (T1:department)-[:management]-() RETURN count(T1)");
    EXPECT_TRUE(compare_results(exec_cypher(m.graph, ex2), rows({{I(3)}})));
}

TEST(ExecCypher, EachEdgeBoundOncePerRow) {
    PropertyGraph g;
    const NodeId a = g.add_node("A", {});
    const NodeId b = g.add_node("B", {});
    g.add_edge("R", a, b);
    // A single edge cannot serve both hops.
    EXPECT_TRUE(exec_cypher(g, cypher::parse_cypher("MATCH (x)-[r1]-(y)-[r2]-(z) RETURN x")).rows.empty());
    EXPECT_EQ(exec_cypher(g, cypher::parse_cypher("MATCH (x)-[r]-(y) RETURN x")).rows.size(), 2u);
}

TEST(ExecCypher, MatchEqualsBruteForceEnumeration) {
    std::mt19937_64 rng(5);
    const char* labels[] = {"A", "B", "C"};
    const char* types[] = {"R", "S"};
    for (int trial = 0; trial < 300; ++trial) {
        PropertyGraph g;
        std::vector<NodeId> ids;
        const int n = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) {
            ids.push_back(g.add_node(labels[rng() % 3], {{"p", I(static_cast<std::int64_t>(rng() % 2))}}));
        }
        const int m = static_cast<int>(rng() % 6);
        for (int i = 0; i < m; ++i) {
            g.add_edge(types[rng() % 2], ids[rng() % ids.size()], ids[rng() % ids.size()],
                       {{"w", I(static_cast<std::int64_t>(rng() % 2))}});
        }

        cypher::PatternPath p;
        auto node_atom = [&](int i) {
            cypher::NodePattern np{"n" + std::to_string(i), "", {}};
            if (rng() % 2) np.label = labels[rng() % 3];
            if (rng() % 4 == 0) np.props.emplace_back("p", I(static_cast<std::int64_t>(rng() % 2)));
            return np;
        };
        p.start = node_atom(0);
        const int hops = static_cast<int>(rng() % 3);
        for (int h = 0; h < hops; ++h) {
            cypher::RelPattern rel{"e" + std::to_string(h), "", {}};
            if (rng() % 2) rel.type = types[rng() % 2];
            if (rng() % 4 == 0) rel.props.emplace_back("w", I(static_cast<std::int64_t>(rng() % 2)));
            p.steps.push_back({rel, node_atom(h + 1)});
        }

        cypher::SingleQuery sq;
        sq.clauses.push_back(cypher::Match{{p}, std::nullopt});
        sq.ret.items.push_back({cypher::Expr{cypher::Variable{"n0"}}, ""});
        for (int h = 0; h < hops; ++h) {
            sq.ret.items.push_back({cypher::Expr{cypher::Variable{"e" + std::to_string(h)}}, ""});
            sq.ret.items.push_back({cypher::Expr{cypher::Variable{"n" + std::to_string(h + 1)}}, ""});
        }
        cypher::CypherQuery q;
        q.parts.push_back(std::move(sq));

        ResultSet want;
        want.rows = oracle::brute_match(g, p);
        const ResultSet got = exec_cypher(g, q);
        EXPECT_TRUE(compare_results(got, want)) << cypher::render_cypher(q) << "\n"
                                                << got.to_json().dump() << "\n"
                                                << want.to_json().dump();
    }
}
