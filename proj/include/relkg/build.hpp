#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/graph.hpp"
#include "relkg/relational.hpp"

namespace relkg {

/// A row whose foreign-key values match no node of the referenced label.
struct OrphanIncident {
    std::string table;
    std::size_t row = 0;
    std::string foreign_key;  // "col -> table(col)"
    std::string missing;      // rendered key values
    friend bool operator==(const OrphanIncident&, const OrphanIncident&) = default;
};

struct BuildLog {
    std::map<std::string, std::size_t> nodes_per_table;
    /// Edges created per linking table.
    std::map<std::string, std::size_t> edges_per_table;
    /// Edges created per *_HAS_* type.
    std::map<std::string, std::size_t> has_edges;
    std::vector<OrphanIncident> orphans;
    /// Entity tables with three or more foreign keys, materialized as nodes
    /// plus *_HAS_* edges.
    std::vector<std::string> hyperedges;

    std::size_t node_total() const;
    std::size_t edge_total() const;
    std::size_t orphans_in(std::string_view table) const;
    nlohmann::json to_json() const;
};

/// Materialize a repaired, classified database as a property graph:
/// entity rows become nodes (all columns as properties), linking rows become
/// edges between the endpoints their two keys resolve to (non-key columns as
/// properties), and every outbound key of an entity table becomes a
/// <referenced>_HAS_<table> edge from the referenced node to the row's node.
///
/// Endpoints resolve by value equality on the referenced columns; a key value
/// that matches several nodes produces an edge to each of them.
/// Throws ClassificationMismatch when cls and db disagree on the table set.
std::pair<PropertyGraph, BuildLog> build_graph(const RelationalDatabase& db, const TableClassification& cls);

/// Hash index from referenced-column values to row positions of a target
/// table. Shared by the builder and the expected-statistics computation so
/// both resolve keys identically.
class ReferenceIndex {
public:
    ReferenceIndex(const Table& target, const std::vector<std::string>& columns);
    /// Rows of the target whose columns equal the owner row's key values
    /// under fk. Empty when any key value is null.
    const std::vector<std::size_t>& lookup(const Table& owner, const Row& row, const ForeignKey& fk) const;

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<Value>& k) const noexcept;
    };
    std::unordered_map<std::vector<Value>, std::vector<std::size_t>, KeyHash> rows_;
};

}  // namespace relkg
