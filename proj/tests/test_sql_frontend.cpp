#include <cctype>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "relkg/binding.hpp"
#include "relkg/errors.hpp"
#include "relkg/loaders.hpp"
#include "relkg/sql_parser.hpp"
#include "relkg/text.hpp"
#include "relkg/workload.hpp"
#include "support/fixtures.hpp"

using namespace relkg;

namespace {

// Upper-case every word outside quotes except output aliases, which name
// nothing in the schema and keep their spelling.
std::string shout(const std::string& s) {
    std::set<std::string> aliases;
    {
        std::istringstream in(s);
        std::string prev, w;
        while (in >> w) {
            if (iequals(prev, "AS")) {
                while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back())) && w.back() != '_') w.pop_back();
                aliases.insert(w);
            }
            prev = w;
        }
    }
    std::string out;
    std::string word;
    char quote = 0;
    auto flush = [&] {
        if (!aliases.contains(word)) {
            for (char& c : word) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        out += word;
        word.clear();
    };
    for (char c : s) {
        if (quote) {
            if (c == quote) quote = 0;
            out += c;
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            word += c;
            continue;
        }
        flush();
        if (c == '\'' || c == '"') quote = c;
        out += c;
    }
    flush();
    return out;
}

std::vector<std::string> every_fixture_query() {
    std::vector<std::string> out;
    for (const char* name : fixtures::all) {
        for (auto& q : fixtures::workload_sql(name)) out.push_back(q);
    }
    return out;
}

}  // namespace

TEST(Parse, NotInSubquery) {
    const auto t = sql::parse_sql("SELECT Name FROM singer WHERE Singer_ID NOT IN (SELECT Singer_ID FROM song)");
    ASSERT_TRUE(t.where);
    ASSERT_TRUE(t.where->is<sql::InSubquery>());
    const auto& in = t.where->as<sql::InSubquery>();
    EXPECT_TRUE(in.negated);
    EXPECT_EQ(in.subquery->from.at(0).table.name, "song");
}

TEST(Parse, JoinGroupOrderLimit) {
    const auto t = sql::parse_sql(
        "SELECT T1.skill_id, T1.skill_description FROM Skills AS T1 JOIN Skills_Required_To_Fix AS T2 ON "
        "T1.skill_id = T2.skill_id GROUP BY T1.skill_id ORDER BY count(*) DESC LIMIT 1");
    ASSERT_EQ(t.from.size(), 2u);
    EXPECT_TRUE(t.from[1].on.has_value());
    EXPECT_EQ(t.group_by.size(), 1u);
    ASSERT_EQ(t.order_by.size(), 1u);
    EXPECT_TRUE(t.order_by[0].descending);
    EXPECT_TRUE(t.order_by[0].expr.is<sql::Aggregate>());
    EXPECT_EQ(t.limit, 1);
}

TEST(Parse, ErrorOffsetAndExpected) {
    try {
        sql::parse_sql("SELEC x FROM t");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 0u);
        EXPECT_FALSE(e.expected().empty());
    }
    auto r = sql::try_parse_sql("SELECT a FROM t LEFT JOIN u ON t.a = u.a");
    EXPECT_TRUE(std::holds_alternative<ParseError>(r));
}

TEST(Parse, BetweenDesugars) {
    const auto t = sql::parse_sql("SELECT a FROM t WHERE a BETWEEN 1 AND 3");
    ASSERT_TRUE(t.where->is<sql::And>());
    EXPECT_TRUE(t.where->as<sql::And>().lhs->is<sql::Comparison>());
}

TEST(Parse, StringEscapes) {
    const auto t = sql::parse_sql("SELECT a FROM t WHERE b = 'it''s' AND c = \"dq\"");
    const auto& a = t.where->as<sql::And>();
    EXPECT_EQ(a.lhs->as<sql::Comparison>().rhs->as<sql::Literal>().value, Value::text("it's"));
    EXPECT_EQ(a.rhs->as<sql::Comparison>().rhs->as<sql::Literal>().value, Value::text("dq"));
}

TEST(Parse, RenderReparseFixpointOnFixtures) {
    for (const auto& q : every_fixture_query()) {
        auto r = sql::try_parse_sql(q);
        if (!std::holds_alternative<sql::Select>(r)) continue;
        const auto& t = std::get<sql::Select>(r);
        EXPECT_EQ(sql::parse_sql(sql::render_sql(t)), t) << q;
    }
}

TEST(Parse, RenderReparseFixpointOnGenerated) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        for (const auto& it : generate_random_instance(seed).workload.items) {
            const auto t = sql::parse_sql(it.sql);
            EXPECT_EQ(sql::parse_sql(sql::render_sql(t)), t) << it.sql;
        }
    }
}

TEST(Parse, CaseInsensitiveAfterBinding) {
    for (const char* name : fixtures::all) {
        const auto binding = SchemaBinding::from_database(fixtures::database(name));
        for (const auto& q : fixtures::workload_sql(name)) {
            auto r = sql::try_parse_sql(q);
            if (!std::holds_alternative<sql::Select>(r)) continue;
            const auto upper = sql::parse_sql(shout(q));
            EXPECT_EQ(normalize_identifiers(upper, binding), normalize_identifiers(std::get<sql::Select>(r), binding))
                << q;
        }
    }
}

TEST(Parse, JsonTreeKeyedByClause) {
    const auto j = sql::to_json(sql::parse_sql("SELECT a FROM t WHERE a > 1 ORDER BY a LIMIT 2"));
    EXPECT_TRUE(j.contains("select"));
    EXPECT_TRUE(j.contains("from"));
    EXPECT_TRUE(j.contains("where"));
    EXPECT_TRUE(j.contains("orderby"));
    EXPECT_TRUE(j.contains("limit"));
}

TEST(Binding, NormalizesCase) {
    SchemaBinding b;
    b.add_table("singer", {"Singer_ID", "Name"});
    const auto t = normalize_identifiers(sql::parse_sql("select name from SINGER"), b);
    EXPECT_EQ(t.from[0].table.name, "singer");
    const auto& c = t.items[0].expr->as<sql::ColumnRef>();
    EXPECT_EQ(c.column, "Name");
    EXPECT_EQ(c.table, "singer");
}

TEST(Binding, ExactIdentifiersUnchanged) {
    SchemaBinding b;
    b.add_table("singer", {"Name"});
    const auto t = sql::parse_sql("SELECT singer.Name FROM singer");
    EXPECT_EQ(normalize_identifiers(t, b), t);
}

TEST(Binding, UnknownColumn) {
    SchemaBinding b;
    b.add_table("singer", {"Name"});
    try {
        normalize_identifiers(sql::parse_sql("SELECT xyz FROM singer"), b);
        FAIL();
    } catch (const UnknownSchemaItem& e) {
        EXPECT_NE(e.item().find("xyz"), std::string::npos);
    }
}

TEST(Binding, RenameTables) {
    const auto t = rename_tables(sql::parse_sql("SELECT Name FROM SINGER"), {{"singer", "singer.singer"}});
    EXPECT_EQ(t.from[0].table.name, "singer.singer");
}
