#include <memory>
#include <sstream>

#include "relkg/eval.hpp"
#include "relkg/text.hpp"

namespace relkg {

GraphStats expected_stats(const RelationalDatabase& db, const TableClassification& cls) {
    GraphStats s;
    std::map<std::pair<std::string, std::vector<std::string>>, std::unique_ptr<ReferenceIndex>> indexes;
    auto matches = [&](const Table& owner, const Row& row, const ForeignKey& fk) -> std::size_t {
        const Table* target = db.find_table(fk.referenced_table);
        if (!target) return 0;
        const TableClass* tc = cls.find(target->name);
        if (!tc || tc->is_linking()) return 0;
        auto& index = indexes[{to_lower(target->name), fk.referenced_columns}];
        if (!index) index = std::make_unique<ReferenceIndex>(*target, fk.referenced_columns);
        return index->lookup(owner, row, fk).size();
    };

    for (const auto& t : db.tables) {
        const TableClass* c = cls.find(t.name);
        if (!c) continue;
        if (!c->is_linking()) {
            if (t.rows.empty()) continue;
            s.label_counts[t.name] += t.rows.size();
            s.node_count += t.rows.size();
            auto& keys = s.label_keys[t.name];
            for (const auto& col : t.columns) keys.insert(col.name);
            for (const auto& fk : c->foreign_keys) {
                const Table* target = db.find_table(fk.referenced_table);
                const std::string type = has_edge_type(target ? target->name : fk.referenced_table, t.name);
                std::size_t n = 0;
                for (const auto& row : t.rows) n += matches(t, row, fk);
                if (n == 0) continue;
                s.type_counts[type] += n;
                s.edge_count += n;
                s.type_keys[type];
            }
            continue;
        }
        std::size_t n = 0;
        for (const auto& row : t.rows) {
            n += matches(t, row, c->foreign_keys[0]) * matches(t, row, c->foreign_keys[1]);
        }
        if (n == 0) continue;
        s.type_counts[t.name] += n;
        s.edge_count += n;
        auto& keys = s.type_keys[t.name];
        for (const auto& col : t.columns) {
            bool in_key = false;
            for (const auto& fk : c->foreign_keys) {
                for (const auto& k : fk.columns) in_key = in_key || iequals(k, col.name);
            }
            if (!in_key) keys.insert(col.name);
        }
    }
    return s;
}

namespace {

std::string join_keys(const std::set<std::string>& keys) {
    std::string out = "{";
    for (const auto& k : keys) out += (out.size() > 1 ? ", " : "") + k;
    return out + "}";
}

template <class Map, class Fmt>
void diff_map(const std::string& kind, const Map& expected, const Map& actual, Fmt fmt, std::vector<StatDiff>& out) {
    std::set<std::string> names;
    for (const auto& [k, _] : expected) names.insert(k);
    for (const auto& [k, _] : actual) names.insert(k);
    for (const auto& n : names) {
        auto e = expected.find(n);
        auto a = actual.find(n);
        const bool he = e != expected.end();
        const bool ha = a != actual.end();
        if (he && ha && e->second == a->second) continue;
        out.push_back({kind, n, he ? fmt(e->second) : "absent", ha ? fmt(a->second) : "absent"});
    }
}

}  // namespace

std::vector<StatDiff> diff_stats(const GraphStats& expected, const GraphStats& actual) {
    std::vector<StatDiff> out;
    auto count = [](std::size_t n) { return std::to_string(n); };
    diff_map("label", expected.label_counts, actual.label_counts, count, out);
    diff_map("type", expected.type_counts, actual.type_counts, count, out);
    diff_map("label_keys", expected.label_keys, actual.label_keys, join_keys, out);
    diff_map("type_keys", expected.type_keys, actual.type_keys, join_keys, out);
    return out;
}

nlohmann::json ConsistencyReport::to_json() const {
    auto diffs = [](const std::vector<StatDiff>& d) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& x : d) {
            out.push_back({{"kind", x.kind}, {"name", x.name}, {"expected", x.expected}, {"actual", x.actual}});
        }
        return out;
    };
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : history) hist.push_back(diffs(h));
    return {{"converged", converged},   {"iterations", iterations}, {"diff", diffs(diff)},
            {"history", hist},          {"expected", expected.to_json()}, {"actual", actual.to_json()}};
}

std::string ConsistencyReport::to_text() const {
    std::ostringstream out;
    out << (converged ? "converged" : "not converged") << " after " << iterations
        << (iterations == 1 ? " iteration\n" : " iterations\n");
    for (std::size_t i = 0; i < history.size(); ++i) {
        for (const auto& d : history[i]) {
            out << "  [" << i + 1 << "] " << d.kind << " " << d.name << ": expected " << d.expected << ", actual "
                << d.actual << "\n";
        }
    }
    return out.str();
}

ConsistencyReport check_and_repair(RelationalDatabase& db, PropertyGraph& graph, int max_iterations) {
    ConsistencyReport report;
    const int limit = std::max(1, max_iterations);
    for (int iter = 1; iter <= limit; ++iter) {
        const TableClassification cls = classify_tables(db);
        report.iterations = iter;
        report.expected = expected_stats(db, cls);
        report.actual = graph_stats(graph);
        report.diff = diff_stats(report.expected, report.actual);
        report.history.push_back(report.diff);
        if (report.diff.empty()) {
            report.converged = true;
            break;
        }
        if (iter == limit) break;
        db = normalize_content(std::move(db)).first;
        graph = build_graph(db, classify_tables(db)).first;
    }
    return report;
}

std::vector<std::pair<std::string, std::string>> Migration::renames() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : repairs.actions) {
        if (a.applied && a.kind == RepairKind::TableRenamed) out.emplace_back(a.before, a.after);
    }
    return out;
}

Migration migrate(RelationalDatabase db, const MigrationOptions& options) {
    Migration m;
    m.original = db;
    std::tie(m.repaired, m.repairs) = run_repairs(std::move(db), options.repairs, options.workload);
    m.classification = classify_tables(m.repaired);
    std::tie(m.graph, m.build) = build_graph(m.repaired, m.classification);
    m.consistency = check_and_repair(m.repaired, m.graph, options.max_iterations);
    if (m.consistency.iterations > 1) {
        m.classification = classify_tables(m.repaired);
        m.build = build_graph(m.repaired, m.classification).second;
    }
    return m;
}

}  // namespace relkg
