#include "relkg/graph.hpp"

#include <algorithm>
#include <sstream>

#include "relkg/errors.hpp"
#include "relkg/text.hpp"

namespace relkg {

namespace {

const std::vector<std::size_t> kNoPositions;

}  // namespace

NodeId PropertyGraph::add_node(std::string label, PropertyMap properties, bool placeholder) {
    Node n{next_node_id_, std::move(label), std::move(properties), placeholder};
    insert_node(std::move(n));
    return nodes_.back().id;
}

EdgeId PropertyGraph::add_edge(std::string type, NodeId src, NodeId dst, PropertyMap properties) {
    Edge e{next_edge_id_, std::move(type), src, dst, std::move(properties)};
    insert_edge(std::move(e));
    return edges_.back().id;
}

void PropertyGraph::insert_node(Node node) {
    if (node.label.empty()) throw GraphFormatError("node " + std::to_string(node.id) + " has an empty label");
    if (node_pos_.count(node.id)) throw GraphFormatError("duplicate node id " + std::to_string(node.id));
    next_node_id_ = std::max(next_node_id_, node.id + 1);
    node_pos_[node.id] = nodes_.size();
    nodes_.push_back(std::move(node));
    adjacency_.emplace_back();
    index_node(nodes_.size() - 1);
}

void PropertyGraph::insert_edge(Edge edge) {
    if (edge_pos_.count(edge.id)) throw GraphFormatError("duplicate edge id " + std::to_string(edge.id));
    if (!node_pos_.count(edge.src) || !node_pos_.count(edge.dst)) {
        throw GraphFormatError("edge " + std::to_string(edge.id) + " references a missing node");
    }
    next_edge_id_ = std::max(next_edge_id_, edge.id + 1);
    edge_pos_[edge.id] = edges_.size();
    edges_.push_back(std::move(edge));
    index_edge(edges_.size() - 1);
}

void PropertyGraph::index_node(std::size_t pos) {
    const Node& n = nodes_[pos];
    by_label_[n.label].push_back(pos);
    auto& per_label = values_[n.label];
    for (const auto& [k, v] : n.properties) per_label[k][v].push_back(pos);
}

void PropertyGraph::index_edge(std::size_t pos) {
    const Edge& e = edges_[pos];
    by_type_[e.type].push_back(pos);
    const std::size_t s = node_pos_.at(e.src);
    const std::size_t d = node_pos_.at(e.dst);
    adjacency_[s].push_back(pos);
    if (d != s) adjacency_[d].push_back(pos);
}

void PropertyGraph::rebuild_indexes() {
    node_pos_.clear();
    edge_pos_.clear();
    by_label_.clear();
    by_type_.clear();
    values_.clear();
    adjacency_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        node_pos_[nodes_[i].id] = i;
        index_node(i);
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        edge_pos_[edges_[i].id] = i;
        index_edge(i);
    }
}

void PropertyGraph::remove_node(NodeId id) {
    if (!node_pos_.count(id)) return;
    std::erase_if(edges_, [&](const Edge& e) { return e.src == id || e.dst == id; });
    std::erase_if(nodes_, [&](const Node& n) { return n.id == id; });
    rebuild_indexes();
}

const Node* PropertyGraph::find_node(NodeId id) const {
    auto it = node_pos_.find(id);
    return it == node_pos_.end() ? nullptr : &nodes_[it->second];
}

const Edge* PropertyGraph::find_edge(EdgeId id) const {
    auto it = edge_pos_.find(id);
    return it == edge_pos_.end() ? nullptr : &edges_[it->second];
}

std::size_t PropertyGraph::node_index(NodeId id) const { return node_pos_.at(id); }

const std::vector<std::size_t>& PropertyGraph::nodes_with_label(std::string_view label) const {
    auto it = by_label_.find(label);
    return it == by_label_.end() ? kNoPositions : it->second;
}

const std::vector<std::size_t>& PropertyGraph::edges_with_type(std::string_view type) const {
    auto it = by_type_.find(type);
    return it == by_type_.end() ? kNoPositions : it->second;
}

const std::vector<std::size_t>& PropertyGraph::find_nodes(std::string_view label, std::string_view key,
                                                          const Value& value) const {
    auto l = values_.find(label);
    if (l == values_.end()) return kNoPositions;
    auto k = l->second.find(key);
    if (k == l->second.end()) return kNoPositions;
    auto v = k->second.find(value);
    return v == k->second.end() ? kNoPositions : v->second;
}

std::vector<std::string> PropertyGraph::labels() const {
    std::vector<std::string> out;
    for (const auto& [l, _] : by_label_) out.push_back(l);
    return out;
}

std::vector<std::string> PropertyGraph::edge_types() const {
    std::vector<std::string> out;
    for (const auto& [t, _] : by_type_) out.push_back(t);
    return out;
}

bool PropertyGraph::indexes_consistent() const {
    PropertyGraph fresh = *this;
    fresh.rebuild_indexes();
    return fresh.node_pos_ == node_pos_ && fresh.edge_pos_ == edge_pos_ && fresh.by_label_ == by_label_ &&
           fresh.by_type_ == by_type_ && fresh.adjacency_ == adjacency_ && fresh.values_ == values_;
}

GraphStats graph_stats(const PropertyGraph& g) {
    GraphStats s;
    s.node_count = g.nodes().size();
    s.edge_count = g.edges().size();
    for (const auto& n : g.nodes()) {
        ++s.label_counts[n.label];
        auto& keys = s.label_keys[n.label];
        for (const auto& [k, _] : n.properties) keys.insert(k);
    }
    for (const auto& e : g.edges()) {
        ++s.type_counts[e.type];
        auto& keys = s.type_keys[e.type];
        for (const auto& [k, _] : e.properties) keys.insert(k);
    }
    return s;
}

nlohmann::json GraphStats::to_json() const {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [l, c] : label_counts) {
        labels[l] = {{"count", c}, {"keys", label_keys.count(l) ? label_keys.at(l) : std::set<std::string>{}}};
    }
    nlohmann::json types = nlohmann::json::object();
    for (const auto& [t, c] : type_counts) {
        types[t] = {{"count", c}, {"keys", type_keys.count(t) ? type_keys.at(t) : std::set<std::string>{}}};
    }
    return {{"nodes", node_count}, {"edges", edge_count}, {"labels", labels}, {"types", types}};
}

std::string GraphStats::to_text() const {
    std::ostringstream out;
    out << "nodes " << node_count << "\nedges " << edge_count << "\n";
    for (const auto& [l, c] : label_counts) out << "label " << l << " " << c << "\n";
    for (const auto& [t, c] : type_counts) out << "type " << t << " " << c << "\n";
    return out.str();
}

ExportFormat parse_export_format(std::string_view name) {
    if (name == "jsonl") return ExportFormat::Jsonl;
    if (name == "cypher-script" || name == "cypher") return ExportFormat::CypherScript;
    throw UnsupportedFormat("unsupported export format: " + std::string(name));
}

nlohmann::json value_to_json(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return nullptr;
        case ValueKind::Integer: return v.as_integer();
        case ValueKind::Float: return v.as_float();
        case ValueKind::Text: return v.as_text();
    }
    return nullptr;
}

Value value_from_json(const nlohmann::json& j) {
    if (j.is_null()) return Value::null();
    if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
    if (j.is_number_float()) return Value::real(j.get<double>());
    if (j.is_string()) return Value::text(j.get<std::string>());
    if (j.is_boolean()) return Value::integer(j.get<bool>() ? 1 : 0);
    throw GraphFormatError("unsupported property value: " + j.dump());
}

namespace {

nlohmann::json properties_json(const PropertyMap& props) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : props) out[k] = value_to_json(v);
    return out;
}

std::string cypher_name(const std::string& name) {
    if (is_plain_identifier(name)) return name;
    std::string out = "`";
    for (char c : name) {
        if (c == '`') out += '`';
        out += c;
    }
    return out + "`";
}

std::string cypher_props(const PropertyMap& props, const std::vector<std::string>* only = nullptr) {
    std::string out;
    for (const auto& [k, v] : props) {
        if (v.is_null()) continue;
        if (only && std::find(only->begin(), only->end(), k) == only->end()) continue;
        out += out.empty() ? " {" : ", ";
        out += cypher_name(k) + ": " + v.to_cypher_literal();
    }
    return out.empty() ? out : out + "}";
}

std::string export_jsonl(const PropertyGraph& g) {
    std::string out;
    for (const auto& n : g.nodes()) {
        nlohmann::json j = {{"kind", "node"},
                            {"id", n.id},
                            {"label", n.label},
                            {"properties", properties_json(n.properties)},
                            {"placeholder", n.placeholder}};
        out += j.dump() + "\n";
    }
    for (const auto& e : g.edges()) {
        nlohmann::json j = {{"kind", "edge"},     {"id", e.id},   {"type", e.type},
                            {"src", e.src},        {"dst", e.dst}, {"properties", properties_json(e.properties)}};
        out += j.dump() + "\n";
    }
    return out;
}

std::string node_address(const PropertyGraph& g, const Node& n, const char* var) {
    auto keys = g.label_keys().find(n.label);
    const bool use_keys = keys != g.label_keys().end() && !keys->second.empty() &&
                          std::all_of(keys->second.begin(), keys->second.end(), [&](const std::string& k) {
                              auto it = n.properties.find(k);
                              return it != n.properties.end() && !it->second.is_null();
                          });
    return std::string("(") + var + ":" + cypher_name(n.label) +
           cypher_props(n.properties, use_keys ? &keys->second : nullptr) + ")";
}

std::string export_cypher_script(const PropertyGraph& g) {
    std::vector<const Node*> nodes;
    for (const auto& n : g.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) {
        if (a->label != b->label) return a->label < b->label;
        if (a->properties != b->properties) return a->properties < b->properties;
        return a->id < b->id;
    });
    std::vector<const Edge*> edges;
    for (const auto& e : g.edges()) edges.push_back(&e);
    std::sort(edges.begin(), edges.end(), [](const Edge* a, const Edge* b) {
        if (a->type != b->type) return a->type < b->type;
        if (a->properties != b->properties) return a->properties < b->properties;
        return a->id < b->id;
    });
    std::string out;
    for (const Node* n : nodes) {
        out += "CREATE (:" + cypher_name(n->label) + cypher_props(n->properties) + ");\n";
    }
    for (const Edge* e : edges) {
        const Node* s = g.find_node(e->src);
        const Node* d = g.find_node(e->dst);
        out += "MATCH " + node_address(g, *s, "a") + ", " + node_address(g, *d, "b") + " CREATE (a)-[:" +
               cypher_name(e->type) + cypher_props(e->properties) + "]->(b);\n";
    }
    return out;
}

}  // namespace

std::string export_graph(const PropertyGraph& g, ExportFormat format) {
    return format == ExportFormat::Jsonl ? export_jsonl(g) : export_cypher_script(g);
}

std::string export_graph(const PropertyGraph& g, std::string_view format) {
    return export_graph(g, parse_export_format(format));
}

PropertyGraph import_jsonl(std::string_view text) {
    PropertyGraph g;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GraphFormatError(where + e.what());
        }
        try {
            PropertyMap props;
            for (const auto& [k, v] : j.at("properties").items()) props[k] = value_from_json(v);
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "node") {
                g.insert_node(Node{j.at("id").get<NodeId>(), j.at("label").get<std::string>(), std::move(props),
                                   j.value("placeholder", false)});
            } else if (kind == "edge") {
                g.insert_edge(Edge{j.at("id").get<EdgeId>(), j.at("type").get<std::string>(),
                                   j.at("src").get<NodeId>(), j.at("dst").get<NodeId>(), std::move(props)});
            } else {
                throw GraphFormatError("unknown record kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw GraphFormatError(where + e.what());
        } catch (const GraphFormatError& e) {
            throw GraphFormatError(where + e.what());
        }
    }
    return g;
}

}  // namespace relkg
