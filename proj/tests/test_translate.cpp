#include <set>

#include <gtest/gtest.h>

#include "relkg/binding.hpp"
#include "relkg/cypher.hpp"
#include "relkg/errors.hpp"
#include "relkg/loaders.hpp"
#include "relkg/sql2cypher.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/text.hpp"
#include "relkg/workload.hpp"
#include "support/fixtures.hpp"

using namespace relkg;

namespace {

const char* kDepartment = R"(
CREATE TABLE department (Department_ID int PRIMARY KEY, Name text, Budget real);
CREATE TABLE head (head_ID int PRIMARY KEY, name text, age int);
CREATE TABLE management (department_ID int, head_ID int, temporary_acting text,
  PRIMARY KEY (department_ID, head_ID),
  FOREIGN KEY (department_ID) REFERENCES department(Department_ID),
  FOREIGN KEY (head_ID) REFERENCES head(head_ID));
)";

const char* kSinger = R"(
CREATE TABLE singer (Singer_ID int PRIMARY KEY, Name text, Country text);
CREATE TABLE song (Song_ID int PRIMARY KEY, Title text, Singer_ID int,
  FOREIGN KEY (Singer_ID) REFERENCES singer(Singer_ID));
)";

std::string tr(const char* schema, const std::string& sql) {
    const auto db = load_sql_dump(schema);
    return cypher::render_cypher(translate(sql::parse_sql(sql), classify_tables(db)));
}

}  // namespace

TEST(Translate, GroupByHavingThroughWith) {
    EXPECT_EQ(tr(kDepartment,
                 "SELECT T1.department_id, T1.name, count(*) FROM management AS T2 JOIN department AS T1 "
                 "ON T1.department_id = T2.department_id GROUP BY T1.department_id HAVING count(*) > 1"),
              "MATCH (T1:department)-[T2:management]-() WITH T1.Department_ID AS Department_ID, T1.Name AS Name, "
              "count(*) AS count WHERE count > 1 RETURN Department_ID, Name, count");
}

TEST(Translate, NotInOverLinkingTable) {
    EXPECT_EQ(tr(kDepartment,
                 "SELECT count(*) FROM department WHERE department_id NOT IN (SELECT department_id FROM management)"),
              "MATCH (de:department) WHERE NOT (de:department)-[:management]-() RETURN count(de)");
}

TEST(Translate, NotInOverEntityTable) {
    EXPECT_EQ(tr(kSinger, "SELECT Name FROM singer WHERE Singer_ID NOT IN (SELECT Singer_ID FROM song)"),
              "MATCH (si:singer) WHERE NOT (si:singer)-[]-(:song) RETURN si.Name");
}

TEST(Translate, HasEdgeJoin) {
    EXPECT_EQ(tr(kSinger, "SELECT T1.Name, T2.Title FROM singer AS T1 JOIN song AS T2 ON T1.Singer_ID = T2.Singer_ID"),
              "MATCH (T1:singer)-[:singer_HAS_song]-(T2:song) RETURN T1.Name, T2.Title");
}

TEST(Translate, InSubqueryCollects) {
    EXPECT_EQ(tr(kSinger, "SELECT Name FROM singer WHERE Singer_ID IN (SELECT Singer_ID FROM song WHERE Title LIKE 'A%')"),
              "MATCH (so:song) WHERE so.Title STARTS WITH 'A' WITH collect(so.Singer_ID) AS sq0 "
              "MATCH (si:singer) WHERE si.Singer_ID IN sq0 RETURN si.Name");
}

TEST(Translate, LinkingKeyColumnReadsEndpoint) {
    EXPECT_EQ(tr(kDepartment, "SELECT head_id FROM management WHERE temporary_acting = 'Yes'"),
              "MATCH (:department)-[ma:management]-(he:head) WHERE ma.temporary_acting = 'Yes' RETURN he.head_ID");
}

TEST(Translate, UnionAliasesColumns) {
    EXPECT_EQ(tr(kSinger, "SELECT Name FROM singer WHERE Country = 'US' UNION SELECT Title FROM song"),
              "MATCH (si:singer) WHERE si.Country = 'US' RETURN si.Name AS Name UNION MATCH (so:song) RETURN so.Title AS Name");
}

TEST(Translate, RoundTripsThroughParser) {
    const std::string text = tr(kDepartment,
                                "SELECT T1.name FROM department AS T1 JOIN management AS T2 ON T1.department_id = "
                                "T2.department_id WHERE T2.temporary_acting = 'Yes' ORDER BY T1.name DESC LIMIT 3");
    EXPECT_EQ(cypher::render_cypher(cypher::parse_cypher(text)), text);
}

TEST(Translate, CorrelatedReferenceIsUntranslatable) {
    EXPECT_THROW(tr(kSinger, "SELECT Name FROM singer AS s WHERE 1 < (SELECT count(*) FROM song WHERE song.Singer_ID = s.Singer_ID)"),
                 UntranslatableQuery);
}

TEST(Translate, GroupedJoinThroughLinkingTable) {
    const auto cls = classify_tables(fixtures::database("department_management"));
    const auto sql = fixtures::workload_sql("department_management");
    EXPECT_EQ(cypher::render_cypher(translate(sql::parse_sql(sql[0]), cls)),
              "MATCH (T1:department)-[T2:management]-() WITH T1.Department_ID AS id, T1.Name AS name, count(*) AS c "
              "WHERE c > 1 RETURN id, name, c");
}

TEST(Translate, NotInBecomesNegationPattern) {
    const auto cls = classify_tables(fixtures::database("department_management"));
    const auto sql = fixtures::workload_sql("department_management");
    EXPECT_EQ(cypher::render_cypher(translate(sql::parse_sql(sql[1]), cls)),
              "MATCH (T1:department) WHERE NOT (T1:department)-[:management]-() RETURN count(T1)");
}

TEST(Translate, GroupedCountNamespaced) {
    const auto m = fixtures::migrate("assets_maintenance", "assets_maintenance");
    const auto tree = rename_tables(sql::parse_sql(fixtures::workload_sql("assets_maintenance")[0]), m.renames());
    EXPECT_EQ(cypher::render_cypher(translate(tree, m.classification)),
              "MATCH (T1:`assets_maintenance.Skills`)-[T2:`assets_maintenance.Skills_Required_To_Fix`]-() "
              "WITH T1.skill_id AS skill_id, T1.skill_description AS skill_description, count(*) AS count "
              "RETURN skill_id, skill_description ORDER BY count DESC LIMIT 1");
}

TEST(Translate, ReturnOnlyQuery) {
    EXPECT_EQ(tr(kSinger, "SELECT Name FROM singer"), "MATCH (si:singer) RETURN si.Name");
}

TEST(Translate, LimitAndOffsetRendering) {
    EXPECT_EQ(tr(kSinger, "SELECT Name FROM singer ORDER BY Name LIMIT 1 OFFSET 2"),
              "MATCH (si:singer) RETURN si.Name ORDER BY si.Name SKIP 2 LIMIT 1");
}

TEST(Translate, UnknownNameRaises) {
    const auto cls = classify_tables(load_sql_dump(kSinger));
    EXPECT_THROW(translate(sql::parse_sql("SELECT xyz FROM singer"), cls), UnknownSchemaItem);
    EXPECT_THROW(translate(sql::parse_sql("SELECT Name FROM nosuch"), cls), UnknownSchemaItem);
}

TEST(Translate, KeywordMapTotal) {
    for (const char* k : {"FROM", "SELECT", "WHERE", "GROUP BY", "HAVING", "ORDER BY", "LIMIT", "OFFSET", "UNION"}) {
        EXPECT_FALSE(KeywordMap::cypher_for(k).empty()) << k;
    }
    EXPECT_EQ(KeywordMap::cypher_for("FROM"), "MATCH");
    EXPECT_EQ(KeywordMap::cypher_for("SELECT"), "RETURN");
    EXPECT_TRUE(KeywordMap::cypher_for("JOIN").empty());
}

namespace {

std::vector<std::string> present_keys(const sql::Select& s) {
    std::vector<std::string> keys;
    for (const sql::Select* p = &s; p; p = p->union_with ? &*p->union_with->next : nullptr) {
        if (!p->from.empty()) keys.push_back("FROM");
        if (!p->items.empty()) keys.push_back("SELECT");
        if (p->where) keys.push_back("WHERE");
        if (!p->group_by.empty()) keys.push_back("GROUP BY");
        if (p->having) keys.push_back("HAVING");
        if (p->union_with) keys.push_back("UNION");
    }
    if (!s.order_by.empty()) keys.push_back("ORDER BY");
    if (s.limit) keys.push_back("LIMIT");
    if (s.offset) keys.push_back("OFFSET");
    return keys;
}

// FK columns of linking tables, which must never show up as properties.
std::set<std::string> linking_key_columns(const TableClassification& cls) {
    std::set<std::string> out;
    for (const auto& t : cls.tables) {
        if (!t.is_linking()) continue;
        for (const auto& fk : t.foreign_keys) {
            for (const auto& c : fk.columns) out.insert(to_lower(c));
        }
    }
    return out;
}

void collect_edge_vars(const cypher::PatternPath& p, std::set<std::string>& out) {
    for (const auto& s : p.steps) {
        if (!s.rel.var.empty()) out.insert(s.rel.var);
    }
}

}  // namespace

TEST(Translate, ProvenanceCoversEveryClause) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto inst = generate_random_instance(seed);
        const auto cls = classify_tables(inst.db);
        for (const auto& it : inst.workload.items) {
            const auto tree = sql::parse_sql(it.sql);
            Translation t;
            try {
                t = translate_with_provenance(tree, cls);
            } catch (const UntranslatableQuery&) {
                continue;
            }
            std::set<std::string> mapped;
            for (const auto& p : t.provenance) {
                mapped.insert(p.sql_key);
                EXPECT_FALSE(p.cypher_clause.empty());
            }
            for (const auto& k : present_keys(tree)) EXPECT_TRUE(mapped.contains(k)) << k << " in " << it.sql;
        }
    }
}

TEST(Translate, LinkingForeignKeysErased) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto inst = generate_random_instance(seed);
        const auto cls = classify_tables(inst.db);
        const auto keys = linking_key_columns(cls);
        for (const auto& it : inst.workload.items) {
            cypher::CypherQuery q;
            try {
                q = translate(sql::parse_sql(it.sql), cls);
            } catch (const UntranslatableQuery&) {
                continue;
            }
            // Property reads on relationship variables never name a key column.
            for (const auto& part : q.parts) {
                std::set<std::string> edge_vars;
                for (const auto& c : part.clauses) {
                    if (const auto* m = std::get_if<cypher::Match>(&c)) {
                        for (const auto& p : m->patterns) collect_edge_vars(p, edge_vars);
                    }
                }
                const std::string text = cypher::render_cypher(q);
                for (const auto& v : edge_vars) {
                    for (const auto& k : keys) {
                        EXPECT_EQ(to_lower(text).find(to_lower(v) + "." + k), std::string::npos) << text;
                    }
                }
            }
            ++checked;
        }
    }
    EXPECT_GT(checked, 500u);
}

TEST(Translate, CypherRenderReparseFixpoint) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto inst = generate_random_instance(seed);
        const auto cls = classify_tables(inst.db);
        for (const auto& it : inst.workload.items) {
            cypher::CypherQuery q;
            try {
                q = translate(sql::parse_sql(it.sql), cls);
            } catch (const UntranslatableQuery&) {
                continue;
            }
            const std::string text = cypher::render_cypher(q);
            EXPECT_EQ(cypher::parse_cypher(text), q) << text;
            EXPECT_EQ(cypher::render_cypher(cypher::parse_cypher(text)), text);
        }
    }
}
