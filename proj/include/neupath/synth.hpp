#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"

namespace neupath {

// Deterministic synthetic HIN: nodes_per_type[t] nodes of each type (ids are
// contiguous, type 0 first), edges_per_type[r] edges sampled without
// replacement from the feasible endpoint pairs of edge type r.
inline HinGraph synth_graph(const NetworkSchema& schema, const std::vector<uint32_t>& nodes_per_type,
                            const std::vector<uint64_t>& edges_per_type, uint64_t seed) {
    if (nodes_per_type.size() != schema.num_node_types())
        throw DataError("synth: nodes_per_type must list every node type");
    if (edges_per_type.size() != schema.num_edge_types())
        throw DataError("synth: edges_per_type must list every edge type");

    std::vector<NodeId> type_base(schema.num_node_types() + 1, 0);
    for (size_t t = 0; t < nodes_per_type.size(); ++t)
        type_base[t + 1] = type_base[t] + nodes_per_type[t];

    std::vector<NodeTypeId> node_types;
    node_types.reserve(type_base.back());
    for (size_t t = 0; t < nodes_per_type.size(); ++t)
        node_types.insert(node_types.end(), nodes_per_type[t], static_cast<NodeTypeId>(t));

    Rng rng(seed);
    std::vector<Edge> edges;
    for (size_t r = 0; r < edges_per_type.size(); ++r) {
        const EdgeTypeDef& et = schema.edge_type(static_cast<EdgeTypeId>(r));
        const uint64_t na = nodes_per_type[et.a];
        const uint64_t nb = nodes_per_type[et.b];
        const bool same = et.a == et.b;
        const uint64_t total = same ? na * (na - 1) / 2 : na * nb;
        const uint64_t want = edges_per_type[r];
        if (want > total)
            throw DataError("synth: " + std::to_string(want) + " edges of type '" + et.name +
                            "' infeasible (only " + std::to_string(total) + " distinct pairs)");

        auto decode = [&](uint64_t code) -> Edge {
            if (!same) {
                NodeId u = type_base[et.a] + static_cast<NodeId>(code / nb);
                NodeId v = type_base[et.b] + static_cast<NodeId>(code % nb);
                return {u, v, static_cast<EdgeTypeId>(r)};
            }
            // triangular decode: code indexes pairs (i, j) with i < j
            uint64_t i = 0, remaining = code;
            while (remaining >= na - 1 - i) {
                remaining -= na - 1 - i;
                ++i;
            }
            uint64_t j = i + 1 + remaining;
            return {type_base[et.a] + static_cast<NodeId>(i),
                    type_base[et.a] + static_cast<NodeId>(j), static_cast<EdgeTypeId>(r)};
        };

        if (want * 2 > total) {
            // dense request: shuffle the whole pair space
            std::vector<uint64_t> codes(total);
            for (uint64_t c = 0; c < total; ++c) codes[c] = c;
            rng.shuffle(codes);
            for (uint64_t k = 0; k < want; ++k) edges.push_back(decode(codes[k]));
        } else {
            std::unordered_set<uint64_t> seen;
            seen.reserve(static_cast<size_t>(want) * 2);
            while (seen.size() < want) {
                uint64_t code = rng.below(total);
                if (seen.insert(code).second) edges.push_back(decode(code));
            }
        }
    }

    return HinGraph::build(schema, std::move(node_types), edges);
}

}  // namespace neupath
