#include "relkg/build.hpp"

#include <algorithm>
#include <memory>

#include "relkg/errors.hpp"
#include "relkg/text.hpp"

namespace relkg {

namespace {

const std::vector<std::size_t> kNoRows;

std::string describe_fk(const ForeignKey& fk) {
    std::string out;
    for (std::size_t i = 0; i < fk.columns.size(); ++i) out += (i ? ", " : "") + fk.columns[i];
    out += " -> " + fk.referenced_table + "(";
    for (std::size_t i = 0; i < fk.referenced_columns.size(); ++i) out += (i ? ", " : "") + fk.referenced_columns[i];
    return out + ")";
}

std::string describe_key(const Table& owner, const Row& row, const ForeignKey& fk) {
    std::string out;
    for (std::size_t i = 0; i < fk.columns.size(); ++i) {
        if (i) out += ", ";
        auto c = owner.column_index(fk.columns[i]);
        out += c ? row[*c].to_sql_literal() : "?";
    }
    return out;
}

}  // namespace

std::size_t ReferenceIndex::KeyHash::operator()(const std::vector<Value>& k) const noexcept {
    std::size_t h = 0x84222325cbf29ce4ULL;
    for (const auto& v : k) h = (h ^ v.hash()) * 0x100000001b3ULL;
    return h;
}

ReferenceIndex::ReferenceIndex(const Table& target, const std::vector<std::string>& columns) {
    std::vector<std::size_t> idx;
    for (const auto& c : columns) {
        auto i = target.column_index(c);
        if (!i) return;  // unknown referenced column: nothing resolves
        idx.push_back(*i);
    }
    for (std::size_t r = 0; r < target.rows.size(); ++r) {
        std::vector<Value> key;
        key.reserve(idx.size());
        for (std::size_t i : idx) key.push_back(target.rows[r][i]);
        rows_[std::move(key)].push_back(r);
    }
}

const std::vector<std::size_t>& ReferenceIndex::lookup(const Table& owner, const Row& row,
                                                       const ForeignKey& fk) const {
    std::vector<Value> key;
    key.reserve(fk.columns.size());
    for (const auto& c : fk.columns) {
        auto i = owner.column_index(c);
        if (!i || row[*i].is_null()) return kNoRows;
        key.push_back(row[*i]);
    }
    auto it = rows_.find(key);
    return it == rows_.end() ? kNoRows : it->second;
}

std::size_t BuildLog::node_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : nodes_per_table) n += c;
    return n;
}

std::size_t BuildLog::edge_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : edges_per_table) n += c;
    for (const auto& [_, c] : has_edges) n += c;
    return n;
}

std::size_t BuildLog::orphans_in(std::string_view table) const {
    return static_cast<std::size_t>(
        std::count_if(orphans.begin(), orphans.end(), [&](const OrphanIncident& o) { return iequals(o.table, table); }));
}

nlohmann::json BuildLog::to_json() const {
    nlohmann::json orphan_list = nlohmann::json::array();
    for (const auto& o : orphans) {
        orphan_list.push_back({{"table", o.table}, {"row", o.row}, {"foreign_key", o.foreign_key}, {"missing", o.missing}});
    }
    return {{"nodes_per_table", nodes_per_table},
            {"edges_per_table", edges_per_table},
            {"has_edges", has_edges},
            {"orphans", orphan_list},
            {"hyperedges", hyperedges}};
}

std::pair<PropertyGraph, BuildLog> build_graph(const RelationalDatabase& db, const TableClassification& cls) {
    for (const auto& c : cls.tables) {
        if (!db.find_table(c.table)) throw ClassificationMismatch("classified table not in database: " + c.table);
    }
    for (const auto& t : db.tables) {
        if (!cls.find(t.name)) throw ClassificationMismatch("table missing from classification: " + t.name);
    }

    PropertyGraph g;
    BuildLog log;
    // Node ids per entity table, indexed by row position.
    std::map<std::string, std::vector<NodeId>> row_nodes;

    for (const auto& t : db.tables) {
        const TableClass& c = *cls.find(t.name);
        if (c.is_linking()) continue;
        auto& ids = row_nodes[to_lower(t.name)];
        ids.reserve(t.rows.size());
        for (const auto& row : t.rows) {
            PropertyMap props;
            for (std::size_t i = 0; i < t.columns.size(); ++i) props[t.columns[i].name] = row[i];
            ids.push_back(g.add_node(t.name, std::move(props), t.placeholder));
        }
        log.nodes_per_table[t.name] = t.rows.size();
        if (!t.primary_key.empty()) g.set_label_key(t.name, t.primary_key);
        if (c.foreign_keys.size() >= 3) log.hyperedges.push_back(t.name);
    }

    // Endpoint nodes of a key: nodes of the referenced entity table whose
    // referenced columns equal the row's key values.
    std::map<std::pair<std::string, std::vector<std::string>>, std::unique_ptr<ReferenceIndex>> indexes;
    auto endpoints = [&](const Table& owner, const Row& row, const ForeignKey& fk) -> std::vector<NodeId> {
        const Table* target = db.find_table(fk.referenced_table);
        if (!target || cls.find(target->name)->is_linking()) return {};
        auto& index = indexes[{to_lower(target->name), fk.referenced_columns}];
        if (!index) index = std::make_unique<ReferenceIndex>(*target, fk.referenced_columns);
        std::vector<NodeId> out;
        const auto& ids = row_nodes[to_lower(target->name)];
        for (std::size_t r : index->lookup(owner, row, fk)) out.push_back(ids[r]);
        return out;
    };
    auto has_null_key = [](const Table& owner, const Row& row, const ForeignKey& fk) {
        return std::any_of(fk.columns.begin(), fk.columns.end(), [&](const std::string& col) {
            auto i = owner.column_index(col);
            return !i || row[*i].is_null();
        });
    };
    auto note_orphan = [&](const Table& owner, std::size_t r, const ForeignKey& fk) {
        log.orphans.push_back({owner.name, r, describe_fk(fk), describe_key(owner, owner.rows[r], fk)});
    };

    for (const auto& t : db.tables) {
        const TableClass& c = *cls.find(t.name);
        if (c.is_linking()) {
            const ForeignKey& fa = c.foreign_keys[0];
            const ForeignKey& fb = c.foreign_keys[1];
            std::vector<std::size_t> prop_cols;
            for (std::size_t i = 0; i < t.columns.size(); ++i) {
                const auto& name = t.columns[i].name;
                auto in_fk = [&](const ForeignKey& fk) {
                    return std::any_of(fk.columns.begin(), fk.columns.end(),
                                       [&](const std::string& col) { return iequals(col, name); });
                };
                if (!in_fk(fa) && !in_fk(fb)) prop_cols.push_back(i);
            }
            std::size_t created = 0;
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                const Row& row = t.rows[r];
                const auto as = endpoints(t, row, fa);
                const auto bs = endpoints(t, row, fb);
                if (as.empty() && !has_null_key(t, row, fa)) note_orphan(t, r, fa);
                if (bs.empty() && !has_null_key(t, row, fb)) note_orphan(t, r, fb);
                PropertyMap props;
                for (std::size_t i : prop_cols) props[t.columns[i].name] = row[i];
                for (NodeId a : as) {
                    for (NodeId b : bs) {
                        g.add_edge(t.name, a, b, props);
                        ++created;
                    }
                }
            }
            log.edges_per_table[t.name] = created;
            continue;
        }
        const auto& own_ids = row_nodes[to_lower(t.name)];
        for (const auto& fk : c.foreign_keys) {
            const Table* target = db.find_table(fk.referenced_table);
            const std::string type = has_edge_type(target ? target->name : fk.referenced_table, t.name);
            std::size_t created = 0;
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                const auto xs = endpoints(t, t.rows[r], fk);
                if (xs.empty() && !has_null_key(t, t.rows[r], fk)) note_orphan(t, r, fk);
                for (NodeId x : xs) {
                    g.add_edge(type, x, own_ids[r]);
                    ++created;
                }
            }
            log.has_edges[type] += created;
        }
    }
    return {std::move(g), std::move(log)};
}

}  // namespace relkg
