#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"
#include "neupath/graph_io.hpp"
#include "neupath/metapath.hpp"
#include "neupath/pathsim.hpp"

namespace neupath {

struct TrainingSample {
    NodeId query;
    NodeId target;
    double label;  // exact PathSim score
};

struct SplitSpec {
    uint32_t n_train = 400;
    uint32_t n_val = 100;
    uint32_t n_test = 400;
    uint32_t pairs_per_query = 10;
    uint64_t seed = 0;
};

struct Dataset {
    NodeTypeId anchor_type = 0;
    std::string metapath_spec;
    SplitSpec split;
    std::vector<NodeId> train_queries, val_queries, test_queries;
    std::vector<TrainingSample> train, val;
    // full exact rows (sparse, zeros omitted) for the test queries
    std::vector<std::vector<std::pair<NodeId, double>>> test_rows;
};

// Ground-truth protocol: disjoint query sets drawn uniformly without
// replacement; train/val queries get pairs_per_query labeled targets (half
// from the nonzero support of the exact row, half uniform over anchor-type
// nodes, deduplicated); test queries keep their full exact rows.
inline Dataset build_dataset(const HinGraph& g, const MetaPath& p, const SplitSpec& split) {
    if (!p.is_symmetric()) throw DataError("build_dataset: meta-path must be symmetric");
    Dataset ds;
    ds.anchor_type = p.anchor_type();
    ds.metapath_spec = p.to_string(g.schema());
    ds.split = split;

    const auto& anchors = g.nodes_of_type(ds.anchor_type);
    const uint32_t n_anchor = static_cast<uint32_t>(anchors.size());
    const uint32_t total = split.n_train + split.n_val + split.n_test;
    if (total > n_anchor)
        throw DataError("build_dataset: requested " + std::to_string(total) +
                        " query nodes but only " + std::to_string(n_anchor) + " nodes of type '" +
                        g.schema().node_type_name(ds.anchor_type) + "' exist");

    Rng rng(split.seed);
    const auto picks = rng.sample_distinct(n_anchor, total);
    for (uint32_t i = 0; i < split.n_train; ++i) ds.train_queries.push_back(anchors[picks[i]]);
    for (uint32_t i = 0; i < split.n_val; ++i)
        ds.val_queries.push_back(anchors[picks[split.n_train + i]]);
    for (uint32_t i = 0; i < split.n_test; ++i)
        ds.test_queries.push_back(anchors[picks[split.n_train + split.n_val + i]]);

    PathSimEngine engine(g, p);
    bool warned_empty = false;

    auto sample_pairs = [&](NodeId q, std::vector<TrainingSample>& out) {
        const auto row = engine.row(q);  // sparse nonzero support
        if (row.empty() && !warned_empty) {
            log_warn("build_dataset: meta-path has empty support at query " + std::to_string(q) +
                     "; labels will be all zero");
            warned_empty = true;
        }
        std::unordered_map<NodeId, double> scores;
        for (const auto& [node, s] : row) scores[node] = s;

        std::unordered_set<NodeId> chosen;
        std::vector<NodeId> targets;
        const uint32_t n_pos = std::min<uint32_t>(split.pairs_per_query / 2,
                                                  static_cast<uint32_t>(row.size()));
        for (uint32_t idx : rng.sample_distinct(static_cast<uint32_t>(row.size()), n_pos)) {
            targets.push_back(row[idx].first);
            chosen.insert(row[idx].first);
        }
        while (targets.size() < split.pairs_per_query && chosen.size() < n_anchor) {
            const NodeId cand = anchors[rng.below(n_anchor)];
            if (!chosen.insert(cand).second) continue;  // collision, resample
            targets.push_back(cand);
        }
        for (NodeId t : targets) {
            auto it = scores.find(t);
            out.push_back({q, t, it == scores.end() ? 0.0 : it->second});
        }
    };

    for (NodeId q : ds.train_queries) sample_pairs(q, ds.train);
    for (NodeId q : ds.val_queries) sample_pairs(q, ds.val);
    for (NodeId q : ds.test_queries) ds.test_rows.push_back(engine.row(q));
    return ds;
}

// ---------------------------------------------------------------------------
// On-disk layout: train.tsv / val.tsv (query, target, label), test_queries.txt,
// rows/<query>.tsv in the ground-truth table format, dataset_manifest.json.
// External ids are used throughout.
// ---------------------------------------------------------------------------

inline void write_dataset(const Dataset& ds, const HinGraph& g,
                          const std::vector<std::string>& original_ids, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "rows");
    auto ext = [&](NodeId v) {
        return original_ids.empty() ? std::to_string(v) : original_ids.at(v);
    };

    auto write_samples = [&](const std::vector<TrainingSample>& samples, const std::string& name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw DataError(dir + "/" + name + ": cannot write");
        for (const auto& s : samples)
            out << ext(s.query) << "\t" << ext(s.target) << "\t" << format_score(s.label) << "\n";
    };
    write_samples(ds.train, "train.tsv");
    write_samples(ds.val, "val.tsv");

    {
        std::ofstream out(fs::path(dir) / "test_queries.txt");
        if (!out) throw DataError(dir + "/test_queries.txt: cannot write");
        for (NodeId q : ds.test_queries) out << ext(q) << "\n";
    }
    for (size_t i = 0; i < ds.test_queries.size(); ++i) {
        const NodeId q = ds.test_queries[i];
        std::ofstream out(fs::path(dir) / "rows" / (ext(q) + ".tsv"));
        if (!out) throw DataError(dir + "/rows: cannot write");
        for (const auto& [t, s] : ds.test_rows[i])
            out << ext(q) << "\t" << ext(t) << "\t" << format_score(s) << "\n";
    }

    nlohmann::json j;
    j["metapath"] = ds.metapath_spec;
    j["anchor_type"] = g.schema().node_type_name(ds.anchor_type);
    j["n_train_queries"] = ds.split.n_train;
    j["n_val_queries"] = ds.split.n_val;
    j["n_test_queries"] = ds.split.n_test;
    j["pairs_per_query"] = ds.split.pairs_per_query;
    j["seed"] = ds.split.seed;
    j["train_samples"] = ds.train.size();
    j["val_samples"] = ds.val.size();
    std::ofstream out(fs::path(dir) / "dataset_manifest.json");
    if (!out) throw DataError(dir + "/dataset_manifest.json: cannot write");
    out << j.dump(2) << "\n";
}

inline Dataset read_dataset(const std::string& dir, const HinGraph& g,
                            const std::vector<std::string>& original_ids) {
    namespace fs = std::filesystem;
    std::unordered_map<std::string, NodeId> index;
    if (original_ids.empty()) {
        for (NodeId v = 0; v < g.num_nodes(); ++v) index[std::to_string(v)] = v;
    } else {
        for (NodeId v = 0; v < g.num_nodes(); ++v) index[original_ids[v]] = v;
    }
    auto dense = [&](const std::string& id, const std::string& where) {
        auto it = index.find(id);
        if (it == index.end())
            throw DataError(where + ": node id '" + id + "' not present in the graph");
        return it->second;
    };

    Dataset ds;
    {
        std::ifstream in(fs::path(dir) / "dataset_manifest.json");
        if (!in) throw DataError(dir + "/dataset_manifest.json: cannot open");
        nlohmann::json j;
        in >> j;
        ds.metapath_spec = j.at("metapath").get<std::string>();
        ds.anchor_type = g.schema().node_type_id(j.at("anchor_type").get<std::string>());
        ds.split.n_train = j.at("n_train_queries").get<uint32_t>();
        ds.split.n_val = j.at("n_val_queries").get<uint32_t>();
        ds.split.n_test = j.at("n_test_queries").get<uint32_t>();
        ds.split.pairs_per_query = j.at("pairs_per_query").get<uint32_t>();
        ds.split.seed = j.at("seed").get<uint64_t>();
    }

    auto read_samples = [&](const std::string& name, std::vector<TrainingSample>& out,
                            std::vector<NodeId>& queries) {
        const std::string path = (fs::path(dir) / name).string();
        std::unordered_set<NodeId> seen;
        detail::for_each_tsv_line(path, [&](size_t lineno, const std::vector<std::string>& f) {
            if (f.size() != 3)
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": expected `query<TAB>target<TAB>label`");
            TrainingSample s;
            s.query = dense(f[0], path);
            s.target = dense(f[1], path);
            s.label = std::stod(f[2]);
            out.push_back(s);
            if (seen.insert(s.query).second) queries.push_back(s.query);
        });
    };
    read_samples("train.tsv", ds.train, ds.train_queries);
    read_samples("val.tsv", ds.val, ds.val_queries);

    {
        const std::string path = (fs::path(dir) / "test_queries.txt").string();
        std::ifstream in(path);
        if (!in) throw DataError(path + ": cannot open");
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            ds.test_queries.push_back(dense(line, path));
        }
    }
    auto ext = [&](NodeId v) {
        return original_ids.empty() ? std::to_string(v) : original_ids.at(v);
    };
    for (NodeId q : ds.test_queries) {
        const std::string path = (fs::path(dir) / "rows" / (ext(q) + ".tsv")).string();
        std::vector<std::pair<NodeId, double>> row;
        detail::for_each_tsv_line(path, [&](size_t lineno, const std::vector<std::string>& f) {
            if (f.size() != 3)
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": expected `query<TAB>target<TAB>score`");
            row.emplace_back(dense(f[1], path), std::stod(f[2]));
        });
        ds.test_rows.push_back(std::move(row));
    }
    return ds;
}

}  // namespace neupath
