#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/schema.hpp"

namespace neupath {

struct Neighbor {
    NodeId node;
    EdgeTypeId edge_type;
    bool operator==(const Neighbor&) const = default;
};

// One undirected edge, listed once.
struct Edge {
    NodeId src;
    NodeId dst;
    EdgeTypeId type;
};

// Immutable typed multigraph. Edges are undirected and mirrored into both
// endpoint adjacency lists; lists are sorted by (neighbor, edge type).
class HinGraph {
  public:
    HinGraph() = default;

    static HinGraph build(NetworkSchema schema, std::vector<NodeTypeId> node_types,
                          const std::vector<Edge>& edges) {
        HinGraph g;
        g.schema_ = std::move(schema);
        g.node_types_ = std::move(node_types);
        const NodeId n = static_cast<NodeId>(g.node_types_.size());

        for (NodeId v = 0; v < n; ++v)
            if (g.node_types_[v] >= g.schema_.num_node_types())
                throw DataError("graph: node " + std::to_string(v) + " has unknown node type id");

        std::vector<std::vector<Neighbor>> adj(n);
        for (const Edge& e : edges) {
            if (e.src >= n || e.dst >= n)
                throw DataError("graph: edge endpoint out of range (" + std::to_string(e.src) +
                                "," + std::to_string(e.dst) + ")");
            if (e.src == e.dst)
                throw DataError("graph: self-loop on node " + std::to_string(e.src) + " rejected");
            if (e.type >= g.schema_.num_edge_types())
                throw DataError("graph: unknown edge type id on edge (" + std::to_string(e.src) +
                                "," + std::to_string(e.dst) + ")");
            if (!g.schema_.edge_type_connects(e.type, g.node_types_[e.src], g.node_types_[e.dst]))
                throw DataError("graph: edge (" + std::to_string(e.src) + "," +
                                std::to_string(e.dst) + ") endpoint types do not match edge type '" +
                                g.schema_.edge_type(e.type).name + "'");
            adj[e.src].push_back({e.dst, e.type});
            adj[e.dst].push_back({e.src, e.type});
        }

        g.adj_offsets_.assign(n + 1, 0);
        for (NodeId v = 0; v < n; ++v) {
            auto& list = adj[v];
            std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) {
                return std::tie(x.node, x.edge_type) < std::tie(y.node, y.edge_type);
            });
            for (size_t i = 1; i < list.size(); ++i)
                if (list[i] == list[i - 1])
                    throw DataError("graph: duplicate edge (" + std::to_string(v) + "," +
                                    std::to_string(list[i].node) + ") of type '" +
                                    g.schema_.edge_type(list[i].edge_type).name + "'");
            g.adj_offsets_[v + 1] = g.adj_offsets_[v] + list.size();
        }
        g.adj_.reserve(g.adj_offsets_[n]);
        for (NodeId v = 0; v < n; ++v)
            g.adj_.insert(g.adj_.end(), adj[v].begin(), adj[v].end());

        g.nodes_by_type_.assign(g.schema_.num_node_types(), {});
        for (NodeId v = 0; v < n; ++v) g.nodes_by_type_[g.node_types_[v]].push_back(v);

        return g;
    }

    const NetworkSchema& schema() const { return schema_; }
    NodeId num_nodes() const { return static_cast<NodeId>(node_types_.size()); }
    uint64_t num_edges() const { return adj_.size() / 2; }

    NodeTypeId node_type(NodeId v) const { return node_types_[v]; }

    std::span<const Neighbor> neighbors(NodeId v) const {
        return {adj_.data() + adj_offsets_[v], adj_.data() + adj_offsets_[v + 1]};
    }

    size_t degree(NodeId v) const { return adj_offsets_[v + 1] - adj_offsets_[v]; }

    // Nodes of one type, ascending.
    const std::vector<NodeId>& nodes_of_type(NodeTypeId t) const { return nodes_by_type_.at(t); }

    // Position of v within nodes_of_type(node_type(v)).
    uint32_t local_index(NodeId v) const {
        const auto& list = nodes_by_type_[node_types_[v]];
        auto it = std::lower_bound(list.begin(), list.end(), v);
        return static_cast<uint32_t>(it - list.begin());
    }

    // Each undirected edge once, ordered by (src, dst, type) with src < dst.
    std::vector<Edge> edge_list() const {
        std::vector<Edge> edges;
        edges.reserve(num_edges());
        for (NodeId v = 0; v < num_nodes(); ++v)
            for (const Neighbor& nb : neighbors(v))
                if (v < nb.node) edges.push_back({v, nb.node, nb.edge_type});
        return edges;
    }

  private:
    NetworkSchema schema_;
    std::vector<NodeTypeId> node_types_;
    std::vector<uint64_t> adj_offsets_;
    std::vector<Neighbor> adj_;
    std::vector<std::vector<NodeId>> nodes_by_type_;
};

}  // namespace neupath
