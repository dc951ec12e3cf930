#pragma once

#include <string>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"
#include "neupath/metapath.hpp"
#include "neupath/synth.hpp"

namespace testutil {

using namespace neupath;

// Two authors, two papers; a1-p1, a1-p2, a2-p1. Under A-P-A the counts are
// c(a1,a1)=2, c(a1,a2)=1, c(a2,a2)=1.
inline HinGraph make_g0() {
    NetworkSchema schema({"A", "P"}, {{"AP", 0, 1}});
    return HinGraph::build(schema, {0, 0, 1, 1}, {{0, 2, 0}, {0, 3, 0}, {1, 2, 0}});
}

inline NetworkSchema apc_schema() {
    return NetworkSchema({"A", "P", "C"}, {{"AP", 0, 1}, {"PC", 1, 2}});
}

inline NetworkSchema imdb_schema() {
    return NetworkSchema({"M", "A", "D"}, {{"MA", 0, 1}, {"MD", 0, 2}});
}

// Random bipartite-relation schema: 2-4 node types, 1-4 edge types, each
// between two distinct types (parallel type pairs allowed).
inline NetworkSchema random_schema(Rng& rng) {
    const int n_types = 2 + static_cast<int>(rng.below(3));
    std::vector<std::string> names;
    for (int t = 0; t < n_types; ++t) names.push_back(std::string(1, static_cast<char>('A' + t)));
    const int n_edges = 1 + static_cast<int>(rng.below(4));
    std::vector<EdgeTypeDef> edges;
    for (int r = 0; r < n_edges; ++r) {
        NodeTypeId a = static_cast<NodeTypeId>(rng.below(n_types));
        NodeTypeId b = static_cast<NodeTypeId>(rng.below(n_types - 1));
        if (b >= a) b++;
        edges.push_back({"r" + std::to_string(r), a, b});
    }
    return NetworkSchema(std::move(names), std::move(edges));
}

// Random small HIN on a schema: 3-13 nodes per type, sparse edges.
inline HinGraph random_hin(Rng& rng, const NetworkSchema& schema) {
    std::vector<uint32_t> nodes;
    for (size_t t = 0; t < schema.num_node_types(); ++t)
        nodes.push_back(3 + static_cast<uint32_t>(rng.below(11)));
    std::vector<uint64_t> edges;
    for (size_t r = 0; r < schema.num_edge_types(); ++r) {
        const auto& et = schema.edge_type(static_cast<EdgeTypeId>(r));
        const uint64_t cap = static_cast<uint64_t>(nodes[et.a]) * nodes[et.b];
        const uint64_t want = std::min<uint64_t>(cap, 1 + rng.below(2 * std::min(nodes[et.a], nodes[et.b])));
        edges.push_back(want);
    }
    return synth_graph(schema, nodes, edges, rng.next());
}

// All symmetric meta-paths with 3 or 5 node types (2 or 4 hops) valid for the
// schema's bipartite relations, deduplicated.
inline std::vector<MetaPath> symmetric_metapaths(const NetworkSchema& schema) {
    std::vector<MetaPath> out;
    const int nt = static_cast<int>(schema.num_node_types());
    const int ne = static_cast<int>(schema.num_edge_types());
    auto other_end = [&](EdgeTypeId r, NodeTypeId from) {
        const auto& et = schema.edge_type(r);
        return et.a == from ? et.b : et.a;
    };
    for (NodeTypeId a = 0; a < nt; ++a) {
        for (EdgeTypeId r0 = 0; r0 < ne; ++r0) {
            if (!schema.edge_type_connects(r0, a, schema.edge_type(r0).a) &&
                schema.edge_type(r0).a != a && schema.edge_type(r0).b != a)
                continue;
            if (schema.edge_type(r0).a != a && schema.edge_type(r0).b != a) continue;
            const NodeTypeId b = other_end(r0, a);
            out.push_back(MetaPath::create(schema, {a, b, a}, {r0, r0}));
            for (EdgeTypeId r1 = 0; r1 < ne; ++r1) {
                if (schema.edge_type(r1).a != b && schema.edge_type(r1).b != b) continue;
                const NodeTypeId c = other_end(r1, b);
                out.push_back(MetaPath::create(schema, {a, b, c, b, a}, {r0, r1, r1, r0}));
            }
        }
    }
    return out;
}

}  // namespace testutil
