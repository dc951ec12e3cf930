#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "neupath/common.hpp"

namespace neupath {

using NodeId = uint32_t;
using NodeTypeId = uint16_t;
using EdgeTypeId = uint16_t;

struct EdgeTypeDef {
    std::string name;
    NodeTypeId a = 0;
    NodeTypeId b = 0;
};

// The meta-level graph: node types plus the edge types connecting them.
class NetworkSchema {
  public:
    NetworkSchema() = default;

    NetworkSchema(std::vector<std::string> node_type_names, std::vector<EdgeTypeDef> edge_types)
        : node_type_names_(std::move(node_type_names)), edge_types_(std::move(edge_types)) {
        for (size_t i = 0; i < node_type_names_.size(); ++i) {
            if (!node_type_index_.emplace(node_type_names_[i], static_cast<NodeTypeId>(i)).second)
                throw DataError("schema: duplicate node type name '" + node_type_names_[i] + "'");
        }
        for (size_t i = 0; i < edge_types_.size(); ++i) {
            const auto& et = edge_types_[i];
            if (et.a >= node_type_names_.size() || et.b >= node_type_names_.size())
                throw DataError("schema: edge type '" + et.name + "' references unknown node type");
            if (!edge_type_index_.emplace(et.name, static_cast<EdgeTypeId>(i)).second)
                throw DataError("schema: duplicate edge type name '" + et.name + "'");
        }
        if (node_type_names_.size() <= 1 && edge_types_.size() <= 1)
            throw DataError("schema: a HIN needs more than one node type or more than one edge type");
    }

    size_t num_node_types() const { return node_type_names_.size(); }
    size_t num_edge_types() const { return edge_types_.size(); }

    const std::string& node_type_name(NodeTypeId t) const { return node_type_names_.at(t); }
    const EdgeTypeDef& edge_type(EdgeTypeId r) const { return edge_types_.at(r); }
    const std::vector<std::string>& node_type_names() const { return node_type_names_; }
    const std::vector<EdgeTypeDef>& edge_types() const { return edge_types_; }

    NodeTypeId node_type_id(const std::string& name) const {
        auto it = node_type_index_.find(name);
        if (it == node_type_index_.end()) throw DataError("schema: unknown node type '" + name + "'");
        return it->second;
    }

    EdgeTypeId edge_type_id(const std::string& name) const {
        auto it = edge_type_index_.find(name);
        if (it == edge_type_index_.end()) throw DataError("schema: unknown edge type '" + name + "'");
        return it->second;
    }

    bool has_node_type(const std::string& name) const { return node_type_index_.count(name) > 0; }

    // Edge types whose endpoint set is exactly {a, b}.
    std::vector<EdgeTypeId> edge_types_between(NodeTypeId a, NodeTypeId b) const {
        std::vector<EdgeTypeId> out;
        for (size_t i = 0; i < edge_types_.size(); ++i) {
            const auto& et = edge_types_[i];
            if ((et.a == a && et.b == b) || (et.a == b && et.b == a))
                out.push_back(static_cast<EdgeTypeId>(i));
        }
        return out;
    }

    bool edge_type_connects(EdgeTypeId r, NodeTypeId a, NodeTypeId b) const {
        const auto& et = edge_types_.at(r);
        return (et.a == a && et.b == b) || (et.a == b && et.b == a);
    }

    // Canonical serialization, used for checkpoint fingerprints.
    std::string canonical_string() const {
        std::string s = "nodes:";
        for (const auto& n : node_type_names_) s += n + ";";
        s += "edges:";
        for (const auto& e : edge_types_)
            s += e.name + "(" + node_type_names_[e.a] + "," + node_type_names_[e.b] + ");";
        return s;
    }

    uint64_t fingerprint() const { return fnv1a(canonical_string()); }

  private:
    std::vector<std::string> node_type_names_;
    std::vector<EdgeTypeDef> edge_types_;
    std::unordered_map<std::string, NodeTypeId> node_type_index_;
    std::unordered_map<std::string, EdgeTypeId> edge_type_index_;
};

}  // namespace neupath
