#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"

namespace neupath {

// A loaded graph plus the mapping dense id -> original id string.
struct LoadedGraph {
    HinGraph graph;
    std::vector<std::string> original_ids;
};

inline NetworkSchema load_schema(const std::string& schema_path) {
    std::ifstream in(schema_path);
    if (!in) throw DataError(schema_path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(schema_path + ": invalid JSON: " + e.what());
    }
    std::vector<std::string> node_types;
    for (const auto& n : j.at("node_types")) node_types.push_back(n.get<std::string>());
    std::unordered_map<std::string, NodeTypeId> index;
    for (size_t i = 0; i < node_types.size(); ++i)
        index[node_types[i]] = static_cast<NodeTypeId>(i);
    std::vector<EdgeTypeDef> edge_types;
    for (const auto& e : j.at("edge_types")) {
        EdgeTypeDef def;
        def.name = e.at("name").get<std::string>();
        auto find = [&](const std::string& name) {
            auto it = index.find(name);
            if (it == index.end())
                throw DataError(schema_path + ": edge type '" + def.name +
                                "' references unknown node type '" + name + "'");
            return it->second;
        };
        def.a = find(e.at("a").get<std::string>());
        def.b = find(e.at("b").get<std::string>());
        edge_types.push_back(def);
    }
    try {
        return NetworkSchema(std::move(node_types), std::move(edge_types));
    } catch (const DataError& e) {
        throw DataError(schema_path + ": " + e.what());
    }
}

inline void save_schema(const NetworkSchema& schema, const std::string& schema_path) {
    nlohmann::json j;
    j["node_types"] = schema.node_type_names();
    j["edge_types"] = nlohmann::json::array();
    for (const auto& et : schema.edge_types())
        j["edge_types"].push_back({{"name", et.name},
                                   {"a", schema.node_type_name(et.a)},
                                   {"b", schema.node_type_name(et.b)}});
    std::ofstream out(schema_path);
    if (!out) throw DataError(schema_path + ": cannot write");
    out << j.dump(2) << "\n";
}

namespace detail {

// TSV line iteration with '#' comments and blank lines skipped.
template <typename Fn>
void for_each_tsv_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        fn(lineno, fields);
    }
}

}  // namespace detail

// Reads nodes.tsv (`id<TAB>type`), edges.tsv (`src<TAB>dst<TAB>edge_type`) and
// schema.json. Original ids are arbitrary strings; dense ids are assigned in
// order of first appearance in nodes.tsv.
inline LoadedGraph load_graph(const std::string& nodes_path, const std::string& edges_path,
                              const std::string& schema_path) {
    NetworkSchema schema = load_schema(schema_path);

    std::vector<std::string> original_ids;
    std::vector<NodeTypeId> node_types;
    std::unordered_map<std::string, NodeId> id_index;

    detail::for_each_tsv_line(nodes_path, [&](size_t lineno, const std::vector<std::string>& f) {
        if (f.size() != 2)
            throw DataError(nodes_path + ":" + std::to_string(lineno) +
                            ": expected `node_id<TAB>node_type_name`");
        if (id_index.count(f[0]))
            throw DataError(nodes_path + ":" + std::to_string(lineno) + ": duplicate node id '" +
                            f[0] + "'");
        NodeTypeId t;
        try {
            t = schema.node_type_id(f[1]);
        } catch (const DataError&) {
            throw DataError(nodes_path + ":" + std::to_string(lineno) + ": unknown node type '" +
                            f[1] + "'");
        }
        id_index[f[0]] = static_cast<NodeId>(original_ids.size());
        original_ids.push_back(f[0]);
        node_types.push_back(t);
    });

    std::vector<Edge> edges;
    detail::for_each_tsv_line(edges_path, [&](size_t lineno, const std::vector<std::string>& f) {
        if (f.size() != 3)
            throw DataError(edges_path + ":" + std::to_string(lineno) +
                            ": expected `src_id<TAB>dst_id<TAB>edge_type_name`");
        auto src = id_index.find(f[0]);
        if (src == id_index.end())
            throw DataError(edges_path + ":" + std::to_string(lineno) +
                            ": dangling edge endpoint '" + f[0] + "'");
        auto dst = id_index.find(f[1]);
        if (dst == id_index.end())
            throw DataError(edges_path + ":" + std::to_string(lineno) +
                            ": dangling edge endpoint '" + f[1] + "'");
        EdgeTypeId r;
        try {
            r = schema.edge_type_id(f[2]);
        } catch (const DataError&) {
            throw DataError(edges_path + ":" + std::to_string(lineno) + ": unknown edge type '" +
                            f[2] + "'");
        }
        const NodeTypeId ta = node_types[src->second], tb = node_types[dst->second];
        if (!schema.edge_type_connects(r, ta, tb))
            throw DataError(edges_path + ":" + std::to_string(lineno) + ": edge ('" + f[0] +
                            "','" + f[1] + "') endpoint types (" + schema.node_type_name(ta) +
                            "," + schema.node_type_name(tb) + ") do not match edge type '" + f[2] +
                            "'");
        edges.push_back({src->second, dst->second, r});
    });

    LoadedGraph out;
    try {
        out.graph = HinGraph::build(std::move(schema), std::move(node_types), edges);
    } catch (const DataError& e) {
        throw DataError(edges_path + ": " + e.what());
    }
    out.original_ids = std::move(original_ids);
    return out;
}

inline void write_id_map(const std::vector<std::string>& original_ids, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot write");
    for (size_t i = 0; i < original_ids.size(); ++i)
        out << i << "\t" << original_ids[i] << "\n";
}

// Writes nodes.tsv / edges.tsv / schema.json into `dir`. When original_ids is
// empty, dense ids are used as the external ids.
inline void save_graph(const HinGraph& g, const std::vector<std::string>& original_ids,
                       const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto ext_id = [&](NodeId v) {
        return original_ids.empty() ? std::to_string(v) : original_ids.at(v);
    };

    std::ofstream nodes(fs::path(dir) / "nodes.tsv");
    if (!nodes) throw DataError(dir + "/nodes.tsv: cannot write");
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        nodes << ext_id(v) << "\t" << g.schema().node_type_name(g.node_type(v)) << "\n";

    std::ofstream edges(fs::path(dir) / "edges.tsv");
    if (!edges) throw DataError(dir + "/edges.tsv: cannot write");
    for (const Edge& e : g.edge_list())
        edges << ext_id(e.src) << "\t" << ext_id(e.dst) << "\t"
              << g.schema().edge_type(e.type).name << "\n";

    save_schema(g.schema(), (fs::path(dir) / "schema.json").string());
}

}  // namespace neupath
