#pragma once

// Enumerates every (node, edge, node, ...) tuple of a graph and keeps the
// ones that satisfy a single path pattern. Exponential, meant for graphs of
// a handful of elements.

#include <string>
#include <vector>

#include "relkg/cypher.hpp"
#include "relkg/graph.hpp"
#include "relkg/relational.hpp"

namespace oracle {

inline bool props_match(const relkg::PropertyMap& have, const relkg::cypher::PropertyList& want) {
    for (const auto& [k, v] : want) {
        auto it = have.find(k);
        if (it == have.end() || it->second.is_null() || v.is_null() || !(it->second == v)) return false;
    }
    return true;
}

/// One row per match: "node#<id>" / "edge#<id>" for every atom, in path order.
inline std::vector<relkg::Row> brute_match(const relkg::PropertyGraph& g, const relkg::cypher::PatternPath& p) {
    using relkg::Value;
    const std::size_t k = p.steps.size() + 1;
    std::vector<const relkg::cypher::NodePattern*> atoms{&p.start};
    for (const auto& s : p.steps) atoms.push_back(&s.node);

    std::vector<relkg::Row> out;
    const auto& nodes = g.nodes();
    const auto& edges = g.edges();
    std::vector<std::size_t> ni(k, 0);
    std::vector<std::size_t> ei(p.steps.size(), 0);

    auto node_ok = [&](std::size_t atom, const relkg::Node& n) {
        if (n.placeholder) return false;
        if (!atoms[atom]->label.empty() && atoms[atom]->label != n.label) return false;
        return props_match(n.properties, atoms[atom]->props);
    };
    auto emit = [&] {
        for (std::size_t a = 0; a + 1 < k; ++a) {
            for (std::size_t b = a + 1; b + 1 < k; ++b) {
                if (ei[a] == ei[b]) return;
            }
        }
        for (std::size_t s = 0; s < p.steps.size(); ++s) {
            const auto& e = edges[ei[s]];
            const auto& rel = p.steps[s].rel;
            if (!rel.type.empty() && rel.type != e.type) return;
            if (!props_match(e.properties, rel.props)) return;
            const auto a = nodes[ni[s]].id;
            const auto b = nodes[ni[s + 1]].id;
            if (!((e.src == a && e.dst == b) || (e.src == b && e.dst == a))) return;
        }
        relkg::Row row;
        row.push_back(Value::text("node#" + std::to_string(nodes[ni[0]].id)));
        for (std::size_t s = 0; s < p.steps.size(); ++s) {
            row.push_back(Value::text("edge#" + std::to_string(edges[ei[s]].id)));
            row.push_back(Value::text("node#" + std::to_string(nodes[ni[s + 1]].id)));
        }
        out.push_back(std::move(row));
    };

    // Odometer over all node tuples, then all edge tuples.
    auto edges_loop = [&](auto&& self, std::size_t s) -> void {
        if (s == p.steps.size()) {
            emit();
            return;
        }
        for (ei[s] = 0; ei[s] < edges.size(); ++ei[s]) self(self, s + 1);
    };
    auto nodes_loop = [&](auto&& self, std::size_t a) -> void {
        if (a == k) {
            edges_loop(edges_loop, 0);
            return;
        }
        for (ni[a] = 0; ni[a] < nodes.size(); ++ni[a]) {
            if (node_ok(a, nodes[ni[a]])) self(self, a + 1);
        }
    };
    nodes_loop(nodes_loop, 0);
    return out;
}

}  // namespace oracle
