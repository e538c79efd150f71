#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "relkg/value.hpp"

namespace relkg {

using NodeId = std::int64_t;
using EdgeId = std::int64_t;
using PropertyMap = std::map<std::string, Value>;

struct Node {
    NodeId id = 0;
    std::string label;
    PropertyMap properties;
    /// Created from a placeholder row of an empty table. Counted in stats,
    /// never matched by queries.
    bool placeholder = false;
    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    EdgeId id = 0;
    std::string type;
    NodeId src = 0;
    NodeId dst = 0;
    PropertyMap properties;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Labeled property graph with label, type, adjacency and per-label
/// property-value indexes. Nodes and edges are addressed by position
/// (insertion order) internally; ids are stable surrogates.
class PropertyGraph {
public:
    NodeId add_node(std::string label, PropertyMap properties, bool placeholder = false);
    /// Throws GraphFormatError if an endpoint does not exist.
    EdgeId add_edge(std::string type, NodeId src, NodeId dst, PropertyMap properties = {});

    /// Insert with a caller-chosen id (import). Throws GraphFormatError on a
    /// duplicate id.
    void insert_node(Node node);
    void insert_edge(Edge edge);

    /// Remove a node and its incident edges. Used for fault injection.
    void remove_node(NodeId id);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }

    const Node* find_node(NodeId id) const;
    const Edge* find_edge(EdgeId id) const;
    std::size_t node_index(NodeId id) const;

    /// Positions of nodes with a label / edges with a type.
    const std::vector<std::size_t>& nodes_with_label(std::string_view label) const;
    const std::vector<std::size_t>& edges_with_type(std::string_view type) const;
    /// Positions of edges incident to the node at a position, insertion order.
    const std::vector<std::size_t>& incident_edges(std::size_t node_pos) const { return adjacency_[node_pos]; }
    /// Positions of nodes with a label whose property equals value (numeric
    /// widening applies; a null value finds explicit null properties).
    const std::vector<std::size_t>& find_nodes(std::string_view label, std::string_view key,
                                               const Value& value) const;

    std::vector<std::string> labels() const;
    std::vector<std::string> edge_types() const;

    /// Key columns per label, used by the cypher-script exporter to address
    /// edge endpoints.
    void set_label_key(const std::string& label, std::vector<std::string> columns) {
        label_keys_[label] = std::move(columns);
    }
    const std::map<std::string, std::vector<std::string>>& label_keys() const { return label_keys_; }

    /// Rebuild every index from scratch and compare with the live ones.
    bool indexes_consistent() const;

private:
    using ValueIndex = std::unordered_map<Value, std::vector<std::size_t>, ValueHash>;

    void index_node(std::size_t pos);
    void index_edge(std::size_t pos);
    void rebuild_indexes();

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<NodeId, std::size_t> node_pos_;
    std::unordered_map<EdgeId, std::size_t> edge_pos_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_label_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_type_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::map<std::string, std::map<std::string, ValueIndex, std::less<>>, std::less<>> values_;
    std::map<std::string, std::vector<std::string>> label_keys_;
    NodeId next_node_id_ = 1;
    EdgeId next_edge_id_ = 1;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::map<std::string, std::size_t> label_counts;
    std::map<std::string, std::size_t> type_counts;
    std::map<std::string, std::set<std::string>> label_keys;
    std::map<std::string, std::set<std::string>> type_keys;

    nlohmann::json to_json() const;
    std::string to_text() const;
    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

GraphStats graph_stats(const PropertyGraph& g);

enum class ExportFormat { Jsonl, CypherScript };

/// "jsonl" or "cypher-script"; throws UnsupportedFormat otherwise.
ExportFormat parse_export_format(std::string_view name);

std::string export_graph(const PropertyGraph& g, ExportFormat format);
std::string export_graph(const PropertyGraph& g, std::string_view format);

/// Read back a jsonl export. Throws GraphFormatError on malformed records.
PropertyGraph import_jsonl(std::string_view text);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace relkg
