#include <random>

#include <gtest/gtest.h>

#include "relkg/build.hpp"
#include "relkg/errors.hpp"
#include "relkg/graph.hpp"
#include "relkg/loaders.hpp"
#include "relkg/repair.hpp"
#include "support/fixtures.hpp"

using namespace relkg;

namespace {

std::pair<PropertyGraph, BuildLog> build(const std::string& fixture) {
    const auto db = run_repairs(fixtures::database(fixture), {}, fixtures::workload_sql(fixture)).first;
    return build_graph(db, classify_tables(db));
}

}  // namespace

TEST(Graph, AddAndIndex) {
    PropertyGraph g;
    const NodeId a = g.add_node("A", {{"k", Value::integer(1)}});
    const NodeId b = g.add_node("B", {{"k", Value::real(1.0)}});
    g.add_edge("R", a, b, {{"w", Value::text("x")}});
    EXPECT_EQ(g.nodes_with_label("A").size(), 1u);
    EXPECT_EQ(g.edges_with_type("R").size(), 1u);
    EXPECT_EQ(g.find_nodes("B", "k", Value::integer(1)).size(), 1u);
    EXPECT_TRUE(g.indexes_consistent());
    EXPECT_THROW(g.add_edge("R", a, 99), GraphFormatError);
}

TEST(Graph, RemoveNodeDropsIncidentEdges) {
    PropertyGraph g;
    const NodeId a = g.add_node("A", {});
    const NodeId b = g.add_node("B", {});
    const NodeId c = g.add_node("C", {});
    g.add_edge("R", a, b);
    g.add_edge("R", b, c);
    g.add_edge("S", a, c);
    g.remove_node(b);
    EXPECT_EQ(g.nodes().size(), 2u);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.edges()[0].type, "S");
    EXPECT_TRUE(g.indexes_consistent());
}

TEST(Graph, IndexesStayConsistentUnderRandomEdits) {
    std::mt19937_64 rng(11);
    PropertyGraph g;
    std::vector<NodeId> ids;
    for (int i = 0; i < 300; ++i) {
        const int op = static_cast<int>(rng() % 4);
        if (op < 2 || ids.size() < 2) {
            ids.push_back(g.add_node("L" + std::to_string(rng() % 3), {{"v", Value::integer(static_cast<std::int64_t>(rng() % 5))}}));
        } else if (op == 2) {
            g.add_edge("T" + std::to_string(rng() % 2), ids[rng() % ids.size()], ids[rng() % ids.size()]);
        } else {
            const std::size_t at = rng() % ids.size();
            g.remove_node(ids[at]);
            ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(at));
        }
    }
    EXPECT_TRUE(g.indexes_consistent());
}

TEST(Build, CollegeMatchesHandCounts) {
    auto [g, log] = build("college_3");
    EXPECT_TRUE(fixtures::stats_match(graph_stats(g), fixtures::stats("college_3")));
    EXPECT_EQ(log.hyperedges, std::vector<std::string>{"Enrolled_in"});
    EXPECT_TRUE(log.orphans.empty());
}

TEST(Build, EveryFixtureMatchesHandCounts) {
    for (const char* name : fixtures::all) {
        auto [g, log] = build(name);
        EXPECT_TRUE(fixtures::stats_match(graph_stats(g), fixtures::stats(name))) << name << "\n"
                                                                                 << graph_stats(g).to_text();
    }
}

TEST(Build, LinkingEdgesCarryOnlyNonKeyColumns) {
    auto [g, log] = build("college_3");
    for (std::size_t pos : g.edges_with_type("Member_of")) {
        const Edge& e = g.edges()[pos];
        EXPECT_EQ(e.properties.size(), 1u);
        EXPECT_TRUE(e.properties.contains("Appt_Type"));
    }
}

TEST(Build, CardinalityConservation) {
    for (const char* name : fixtures::all) {
        const auto db = run_repairs(fixtures::database(name), {}, fixtures::workload_sql(name)).first;
        const auto cls = classify_tables(db);
        auto [g, log] = build_graph(db, cls);
        std::size_t entity_rows = 0;
        for (const auto& t : db.tables) {
            if (!cls.find(t.name)->is_linking()) entity_rows += t.rows.size();
        }
        EXPECT_EQ(g.nodes().size(), entity_rows) << name;
        EXPECT_EQ(g.nodes().size(), log.node_total()) << name;
        EXPECT_EQ(g.edges().size(), log.edge_total()) << name;
    }
}

TEST(Build, OrphanRowsAreLogged) {
    auto db = load_sql_dump(R"(
CREATE TABLE a (id int PRIMARY KEY);
CREATE TABLE b (id int PRIMARY KEY, a_id int, FOREIGN KEY (a_id) REFERENCES a(id));
INSERT INTO a VALUES (1);
INSERT INTO b VALUES (10, 1), (11, 2);
)");
    auto [g, log] = build_graph(db, classify_tables(db));
    EXPECT_EQ(g.edges().size(), 1u);
    ASSERT_EQ(log.orphans.size(), 1u);
    EXPECT_EQ(log.orphans[0].table, "b");
    EXPECT_EQ(log.orphans[0].row, 1u);
}

TEST(Build, ClassificationMismatchThrows) {
    const auto db = fixtures::database("singer");
    EXPECT_THROW(build_graph(db, TableClassification{}), ClassificationMismatch);
}

TEST(Export, JsonlRoundTrip) {
    auto [g, log] = build("college_3");
    const std::string text = export_graph(g, ExportFormat::Jsonl);
    const PropertyGraph back = import_jsonl(text);
    EXPECT_EQ(back.nodes(), g.nodes());
    EXPECT_EQ(back.edges(), g.edges());
    EXPECT_EQ(graph_stats(back), graph_stats(g));
    EXPECT_EQ(export_graph(back, ExportFormat::Jsonl), text);
}

TEST(Export, CypherScriptMentionsEveryLabel) {
    auto [g, log] = build("college_3");
    const std::string script = export_graph(g, "cypher-script");
    for (const auto& l : g.labels()) EXPECT_NE(script.find(":" + l), std::string::npos) << l;
    for (const auto& t : g.edge_types()) EXPECT_NE(script.find(":" + t), std::string::npos) << t;
}

TEST(Export, UnknownFormat) {
    EXPECT_THROW(parse_export_format("graphml"), UnsupportedFormat);
    EXPECT_THROW(import_jsonl("{\"kind\": \"node\"\n"), GraphFormatError);
}

TEST(Stats, PlaceholderNodesCount) {
    auto db = normalize_content(load_sql_dump("CREATE TABLE t(a int, b int);")).first;
    auto [g, log] = build_graph(db, classify_tables(db));
    ASSERT_EQ(g.nodes().size(), 1u);
    EXPECT_TRUE(g.nodes()[0].placeholder);
    EXPECT_EQ(graph_stats(g).label_counts.at("t"), 1u);
}
