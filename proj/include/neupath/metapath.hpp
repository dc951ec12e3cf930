#pragma once

#include <string>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/schema.hpp"

namespace neupath {

// A template for walks: node types A1..A(l+1) joined by edge types R1..Rl.
class MetaPath {
  public:
    static MetaPath create(const NetworkSchema& schema, std::vector<NodeTypeId> node_types,
                           std::vector<EdgeTypeId> edge_types) {
        if (node_types.size() < 2)
            throw DataError("meta-path: needs at least 2 node types");
        if (edge_types.size() + 1 != node_types.size())
            throw DataError("meta-path: edge type count must be node type count - 1");
        for (size_t i = 0; i < edge_types.size(); ++i) {
            if (!schema.edge_type_connects(edge_types[i], node_types[i], node_types[i + 1]))
                throw DataError("meta-path: edge type '" + schema.edge_type(edge_types[i]).name +
                                "' does not connect '" + schema.node_type_name(node_types[i]) +
                                "' and '" + schema.node_type_name(node_types[i + 1]) + "'");
        }
        MetaPath p;
        p.node_types_ = std::move(node_types);
        p.edge_types_ = std::move(edge_types);
        return p;
    }

    const std::vector<NodeTypeId>& node_types() const { return node_types_; }
    const std::vector<EdgeTypeId>& edge_types() const { return edge_types_; }

    size_t hops() const { return edge_types_.size(); }
    NodeTypeId anchor_type() const { return node_types_.front(); }
    NodeTypeId tail_type() const { return node_types_.back(); }

    bool is_symmetric() const {
        const size_t n = node_types_.size();
        for (size_t i = 0; i < n / 2; ++i)
            if (node_types_[i] != node_types_[n - 1 - i]) return false;
        const size_t m = edge_types_.size();
        for (size_t i = 0; i < m / 2; ++i)
            if (edge_types_[i] != edge_types_[m - 1 - i]) return false;
        return true;
    }

    std::string to_string(const NetworkSchema& schema) const {
        std::string s = schema.node_type_name(node_types_[0]);
        for (size_t i = 0; i < edge_types_.size(); ++i) {
            s += "[" + schema.edge_type(edge_types_[i]).name + "]";
            s += schema.node_type_name(node_types_[i + 1]);
        }
        return s;
    }

  private:
    std::vector<NodeTypeId> node_types_;
    std::vector<EdgeTypeId> edge_types_;
};

// Parses "A-P-A" (edge types inferred when unambiguous) or explicit
// "A[AP]P[PA]A". Mixed forms like "A[AP]P-A" are accepted too.
inline MetaPath parse_metapath(const std::string& spec, const NetworkSchema& schema) {
    std::vector<NodeTypeId> node_types;
    std::vector<EdgeTypeId> edge_types;
    std::vector<bool> edge_explicit;

    size_t i = 0;
    auto read_name = [&](char stop1, char stop2) {
        size_t start = i;
        while (i < spec.size() && spec[i] != stop1 && spec[i] != stop2 && spec[i] != ']') ++i;
        return spec.substr(start, i - start);
    };

    std::string first = read_name('-', '[');
    if (first.empty()) throw DataError("meta-path '" + spec + "': empty node type name");
    node_types.push_back(schema.node_type_id(first));

    while (i < spec.size()) {
        if (spec[i] == '-') {
            ++i;
            edge_explicit.push_back(false);
            edge_types.push_back(0);  // resolved below
        } else if (spec[i] == '[') {
            ++i;
            std::string ename = read_name(']', ']');
            if (i >= spec.size() || spec[i] != ']')
                throw DataError("meta-path '" + spec + "': unterminated '[' edge type");
            ++i;
            edge_explicit.push_back(true);
            edge_types.push_back(schema.edge_type_id(ename));
        } else {
            throw DataError("meta-path '" + spec + "': expected '-' or '[' at position " +
                            std::to_string(i));
        }
        std::string name = read_name('-', '[');
        if (name.empty()) throw DataError("meta-path '" + spec + "': empty node type name");
        node_types.push_back(schema.node_type_id(name));
    }

    for (size_t k = 0; k < edge_types.size(); ++k) {
        if (edge_explicit[k]) continue;
        auto candidates = schema.edge_types_between(node_types[k], node_types[k + 1]);
        if (candidates.empty())
            throw DataError("meta-path '" + spec + "': no edge type connects '" +
                            schema.node_type_name(node_types[k]) + "' and '" +
                            schema.node_type_name(node_types[k + 1]) + "'");
        if (candidates.size() > 1)
            throw DataError("meta-path '" + spec + "': multiple edge types connect '" +
                            schema.node_type_name(node_types[k]) + "' and '" +
                            schema.node_type_name(node_types[k + 1]) +
                            "'; use the explicit [EdgeType] syntax");
        edge_types[k] = candidates[0];
    }

    return MetaPath::create(schema, std::move(node_types), std::move(edge_types));
}

}  // namespace neupath
