#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"
#include "neupath/tape.hpp"
#include "neupath/tensor.hpp"

namespace neupath {

enum class Aggregator : uint8_t { TopT, Mean, Max, Sum };

inline const char* aggregator_name(Aggregator a) {
    switch (a) {
        case Aggregator::TopT: return "topT";
        case Aggregator::Mean: return "mean";
        case Aggregator::Max: return "max";
        case Aggregator::Sum: return "sum";
    }
    return "?";
}

inline Aggregator parse_aggregator(const std::string& s) {
    if (s == "topT" || s == "topt") return Aggregator::TopT;
    if (s == "mean") return Aggregator::Mean;
    if (s == "max") return Aggregator::Max;
    if (s == "sum") return Aggregator::Sum;
    throw UsageError("unknown aggregator '" + s + "' (expected topT|mean|max|sum)");
}

struct ModelConfig {
    int d = 32;
    int T = 2;
    int L = 2;
    Aggregator aggregator = Aggregator::TopT;
    bool use_node_type = true;
    bool use_edge_type = true;

    // mean/max/sum output a single pooled vector, so they run with one slot
    int slots() const { return aggregator == Aggregator::TopT ? T : 1; }
    int msg_width() const { return use_edge_type ? 3 * d : 2 * d; }

    void validate() const {
        if (d < 2) throw UsageError("model: hidden width d must be >= 2");
        if (T < 1) throw UsageError("model: slot count T must be >= 1");
        if (L < 1) throw UsageError("model: layer count L must be >= 1");
    }
};

// All trainable weights. Projections are per node type (or one shared matrix),
// edge embeddings per edge type; message/update/decoder matrices are global.
struct ModelParams {
    ModelConfig cfg;
    uint64_t schema_fingerprint = 0;
    std::vector<std::string> node_type_names;
    std::vector<std::string> edge_type_names;

    std::vector<Tensor> w_node;    // d x d each
    std::vector<Tensor> e_edge;    // d x 1 each (empty when !use_edge_type)
    Tensor w_msg;                  // d x msg_width
    Tensor w_update;               // d x 2d
    Tensor w_dec_hidden;           // d x (d * slots)
    Tensor w_dec_out;              // 1 x d

    static ModelParams init(const NetworkSchema& schema, const ModelConfig& cfg, uint64_t seed) {
        cfg.validate();
        ModelParams p;
        p.cfg = cfg;
        p.schema_fingerprint = schema.fingerprint();
        p.node_type_names = schema.node_type_names();
        for (const auto& et : schema.edge_types()) p.edge_type_names.push_back(et.name);

        Rng rng(seed);
        auto fan_uniform = [&](Tensor& t) {
            const double a = std::sqrt(6.0 / (t.rows + t.cols));
            for (double& v : t.data) v = rng.uniform(-a, a);
        };

        const int d = cfg.d;
        const size_t n_proj = cfg.use_node_type ? schema.num_node_types() : 1;
        for (size_t i = 0; i < n_proj; ++i) {
            Tensor w(d, d);
            fan_uniform(w);
            p.w_node.push_back(std::move(w));
        }
        if (cfg.use_edge_type) {
            for (size_t i = 0; i < schema.num_edge_types(); ++i) {
                Tensor e(d, 1);
                for (double& v : e.data) v = rng.uniform(-0.1, 0.1);
                p.e_edge.push_back(std::move(e));
            }
        }
        p.w_msg = Tensor(d, cfg.msg_width());
        fan_uniform(p.w_msg);
        p.w_update = Tensor(d, 2 * d);
        fan_uniform(p.w_update);
        p.w_dec_hidden = Tensor(d, d * cfg.slots());
        fan_uniform(p.w_dec_hidden);
        p.w_dec_out = Tensor(1, d);
        fan_uniform(p.w_dec_out);
        return p;
    }

    const Tensor& projection(NodeTypeId t) const {
        return cfg.use_node_type ? w_node.at(t) : w_node.at(0);
    }

    // Fixed enumeration order shared by tape registration, gradient
    // extraction and the optimizer state.
    template <typename Fn>
    void for_each(Fn&& fn) {
        for (size_t i = 0; i < w_node.size(); ++i)
            fn(cfg.use_node_type ? "W_node:" + node_type_names[i] : std::string("W_node:shared"),
               w_node[i]);
        for (size_t i = 0; i < e_edge.size(); ++i) fn("e_edge:" + edge_type_names[i], e_edge[i]);
        fn(std::string("W_msg"), w_msg);
        fn(std::string("W_update"), w_update);
        fn(std::string("W_dec_hidden"), w_dec_hidden);
        fn(std::string("W_dec_out"), w_dec_out);
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        const_cast<ModelParams*>(this)->for_each(
            [&](const std::string& name, Tensor& t) { fn(name, static_cast<const Tensor&>(t)); });
    }

    size_t num_tensors() const {
        return w_node.size() + e_edge.size() + 4;
    }

    size_t num_scalars() const {
        size_t n = 0;
        for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
        return n;
    }

    void check_covers(const NetworkSchema& schema) const {
        const size_t want_proj = cfg.use_node_type ? schema.num_node_types() : 1;
        if (w_node.size() != want_proj)
            throw DataError("model: parameters cover " + std::to_string(w_node.size()) +
                            " node types but the graph schema has " +
                            std::to_string(schema.num_node_types()));
        if (cfg.use_edge_type && e_edge.size() != schema.num_edge_types())
            throw DataError("model: parameters cover " + std::to_string(e_edge.size()) +
                            " edge types but the graph schema has " +
                            std::to_string(schema.num_edge_types()));
    }
};

// Initial node feature (Basis vectors: the query gets e1, every other node e2,
// regardless of its type).
inline Tensor initial_feature(int d, bool is_query) {
    if (d < 2) throw UsageError("init_features: d must be >= 2");
    Tensor x(d, 1);
    x.data[is_query ? 0 : 1] = 1.0;
    return x;
}

// Layer-0 states, one row per node (all T slots are identical at layer 0).
inline std::vector<double> init_features(const HinGraph& g, NodeId query, int d) {
    if (d < 2) throw UsageError("init_features: d must be >= 2");
    std::vector<double> h(static_cast<size_t>(g.num_nodes()) * d, 0.0);
    for (NodeId v = 0; v < g.num_nodes(); ++v) h[static_cast<size_t>(v) * d + (v == query ? 0 : 1)] = 1.0;
    return h;
}

// Pooling winner routes plus decoder ReLU signs, in build order. Two forwards
// with equal signatures sit on the same smooth piece of the model.
struct SelectionSignature {
    std::vector<int32_t> data;
    bool operator==(const SelectionSignature&) const = default;
};

namespace detail {

// One encoder layer in plain (tape-free) arithmetic. h holds V*S vectors of
// width d; all buffers are caller-owned so repeated calls do not allocate.
struct PlainWorkspace {
    std::vector<double> proj, h_next, cand, q, msgcat;
    std::vector<const double*> cand_ptrs;
    std::vector<int32_t> routes;
};

inline void encoder_layer_plain(const HinGraph& g, const ModelParams& mp,
                                const std::vector<double>& h, std::vector<double>& h_out,
                                PlainWorkspace& ws, SelectionSignature* sig) {
    const int d = mp.cfg.d;
    const int S = mp.cfg.slots();
    const int W = mp.cfg.msg_width();
    const NodeId V = g.num_nodes();

    ws.proj.resize(h.size());
    for (NodeId v = 0; v < V; ++v) {
        const Tensor& wt = mp.projection(g.node_type(v));
        for (int i = 0; i < S; ++i) {
            const size_t off = (static_cast<size_t>(v) * S + i) * d;
            kernels::matmul(wt.data.data(), d, d, h.data() + off, 1, ws.proj.data() + off);
        }
    }

    ws.h_next.resize(h.size());
    ws.q.resize(static_cast<size_t>(S) * d);
    ws.msgcat.resize(W);
    ws.routes.resize(static_cast<size_t>(S) * d);

    for (NodeId t = 0; t < V; ++t) {
        const auto nbrs = g.neighbors(t);
        if (nbrs.empty()) {
            std::fill(ws.q.begin(), ws.q.end(), 0.0);
        } else {
            const int n_cand = static_cast<int>(nbrs.size()) * S;
            ws.cand.resize(static_cast<size_t>(n_cand) * d);
            int idx = 0;
            for (const Neighbor& nb : nbrs) {
                for (int i = 0; i < S; ++i) {
                    // message = W_msg [ proj(s) || e_edge || proj(t) ]
                    const double* ps = ws.proj.data() + (static_cast<size_t>(nb.node) * S + i) * d;
                    const double* pt = ws.proj.data() + (static_cast<size_t>(t) * S + i) * d;
                    double* cat = ws.msgcat.data();
                    std::copy(ps, ps + d, cat);
                    if (mp.cfg.use_edge_type) {
                        const auto& ee = mp.e_edge[nb.edge_type].data;
                        std::copy(ee.begin(), ee.end(), cat + d);
                        std::copy(pt, pt + d, cat + 2 * d);
                    } else {
                        std::copy(pt, pt + d, cat + d);
                    }
                    kernels::matmul(mp.w_msg.data.data(), d, W, cat, 1,
                                    ws.cand.data() + static_cast<size_t>(idx) * d);
                    ++idx;
                }
            }
            ws.cand_ptrs.resize(n_cand);
            for (int c = 0; c < n_cand; ++c)
                ws.cand_ptrs[c] = ws.cand.data() + static_cast<size_t>(c) * d;

            switch (mp.cfg.aggregator) {
                case Aggregator::TopT:
                case Aggregator::Max:
                    kernels::select_top_t(ws.cand_ptrs.data(), n_cand, d, S, ws.q.data(),
                                          ws.routes.data());
                    if (sig)
                        sig->data.insert(sig->data.end(), ws.routes.begin(), ws.routes.end());
                    break;
                case Aggregator::Mean:
                case Aggregator::Sum:
                    std::fill(ws.q.begin(), ws.q.end(), 0.0);
                    for (int c = 0; c < n_cand; ++c)
                        for (int j = 0; j < d; ++j) ws.q[j] += ws.cand_ptrs[c][j];
                    if (mp.cfg.aggregator == Aggregator::Mean)
                        for (int j = 0; j < d; ++j) ws.q[j] /= static_cast<double>(n_cand);
                    break;
            }
        }
        for (int i = 0; i < S; ++i) {
            // update = W_update [ h || q ]
            const size_t off = (static_cast<size_t>(t) * S + i) * d;
            double* cat = ws.msgcat.data();  // 2d <= W
            std::copy(h.data() + off, h.data() + off + d, cat);
            std::copy(ws.q.data() + static_cast<size_t>(i) * d,
                      ws.q.data() + static_cast<size_t>(i + 1) * d, cat + d);
            kernels::matmul(mp.w_update.data.data(), d, 2 * d, cat, 1, ws.h_next.data() + off);
        }
    }
    h_out.swap(ws.h_next);
}

}  // namespace detail

// Final-layer states for every node: V * slots vectors of width d.
inline std::vector<double> encode_states(const HinGraph& g, const ModelParams& mp, NodeId query,
                                         SelectionSignature* sig = nullptr) {
    mp.check_covers(g.schema());
    const int d = mp.cfg.d;
    const int S = mp.cfg.slots();
    std::vector<double> h(static_cast<size_t>(g.num_nodes()) * S * d, 0.0);
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        for (int i = 0; i < S; ++i)
            h[(static_cast<size_t>(v) * S + i) * d + (v == query ? 0 : 1)] = 1.0;

    detail::PlainWorkspace ws;
    std::vector<double> h_next;
    for (int l = 1; l <= mp.cfg.L; ++l) {
        detail::encoder_layer_plain(g, mp, h, h_next, ws, sig);
        h.swap(h_next);
    }
    return h;
}

// Decoder on one node's final states (S*d contiguous doubles).
inline double decode_one(const ModelParams& mp, const double* state, SelectionSignature* sig,
                         std::vector<double>& scratch) {
    const int d = mp.cfg.d;
    const int S = mp.cfg.slots();
    scratch.resize(2 * d);
    double* hidden = scratch.data();
    double* act = scratch.data() + d;
    kernels::matmul(mp.w_dec_hidden.data.data(), d, d * S, state, 1, hidden);
    for (int j = 0; j < d; ++j) {
        act[j] = hidden[j] > 0.0 ? hidden[j] : 0.0;
        if (sig) sig->data.push_back(hidden[j] > 0.0 ? 1 : 0);
    }
    double y;
    kernels::matmul(mp.w_dec_out.data.data(), 1, d, act, 1, &y);
    return y;
}

// Scores y_ct for every node t with the query's type, ordered by node id.
inline std::vector<double> forward_all(const HinGraph& g, const ModelParams& mp, NodeId query,
                                       SelectionSignature* sig = nullptr) {
    const auto states = encode_states(g, mp, query, sig);
    const int d = mp.cfg.d;
    const int S = mp.cfg.slots();
    const auto& candidates = g.nodes_of_type(g.node_type(query));
    std::vector<double> scores(candidates.size());
    std::vector<double> scratch;
    for (size_t i = 0; i < candidates.size(); ++i)
        scores[i] = decode_one(mp, states.data() + static_cast<size_t>(candidates[i]) * S * d, sig,
                               scratch);
    return scores;
}

// ---------------------------------------------------------------------------
// Tape construction for training: the same computation recorded for reverse
// mode. Values are bit-identical to the plain path (shared kernels, same
// loop order); tests pin that equivalence.
// ---------------------------------------------------------------------------

struct ModelTape {
    Tape tape;
    std::vector<int> param_slots;  // in ModelParams::for_each order
    std::vector<int> pred_slots;   // one per requested target
    int loss_slot = -1;
};

inline void build_model_tape(const HinGraph& g, const ModelParams& mp, NodeId query,
                             std::span<const NodeId> targets, std::span<const double> labels,
                             ModelTape& mt) {
    mp.check_covers(g.schema());
    mt.tape.reset();
    mt.param_slots.clear();
    mt.pred_slots.clear();
    Tape& tape = mt.tape;

    const int d = mp.cfg.d;
    const int S = mp.cfg.slots();
    const NodeId V = g.num_nodes();

    std::vector<int> wnode_slots, eedge_slots;
    int wmsg_slot = -1, wupd_slot = -1, wdech_slot = -1, wdeco_slot = -1;
    mp.for_each([&](const std::string& name, const Tensor& t) {
        int s = tape.leaf(t);
        mt.param_slots.push_back(s);
        if (name.rfind("W_node:", 0) == 0) wnode_slots.push_back(s);
        else if (name.rfind("e_edge:", 0) == 0) eedge_slots.push_back(s);
        else if (name == "W_msg") wmsg_slot = s;
        else if (name == "W_update") wupd_slot = s;
        else if (name == "W_dec_hidden") wdech_slot = s;
        else if (name == "W_dec_out") wdeco_slot = s;
    });
    auto wnode_of = [&](NodeTypeId t) { return mp.cfg.use_node_type ? wnode_slots[t] : wnode_slots[0]; };

    const int query_leaf = tape.leaf(initial_feature(d, true));
    const int other_leaf = tape.leaf(initial_feature(d, false));
    const int zero_q = tape.zeros(d, 1);

    // h[v*S + i] = slot id of node v, stream i
    std::vector<int> h(static_cast<size_t>(V) * S);
    for (NodeId v = 0; v < V; ++v)
        for (int i = 0; i < S; ++i) h[static_cast<size_t>(v) * S + i] = v == query ? query_leaf : other_leaf;

    std::vector<int> proj(h.size());
    std::vector<int> h_next(h.size());
    std::vector<int> cands;
    std::vector<int> cat3;

    for (int l = 1; l <= mp.cfg.L; ++l) {
        for (NodeId v = 0; v < V; ++v)
            for (int i = 0; i < S; ++i) {
                const size_t idx = static_cast<size_t>(v) * S + i;
                proj[idx] = tape.matmul(wnode_of(g.node_type(v)), h[idx]);
            }
        for (NodeId t = 0; t < V; ++t) {
            const auto nbrs = g.neighbors(t);
            std::vector<int> q_slots(S, zero_q);
            if (!nbrs.empty()) {
                cands.clear();
                for (const Neighbor& nb : nbrs) {
                    for (int i = 0; i < S; ++i) {
                        cat3.clear();
                        cat3.push_back(proj[static_cast<size_t>(nb.node) * S + i]);
                        if (mp.cfg.use_edge_type) cat3.push_back(eedge_slots[nb.edge_type]);
                        cat3.push_back(proj[static_cast<size_t>(t) * S + i]);
                        cands.push_back(tape.matmul(wmsg_slot, tape.concat(cat3)));
                    }
                }
                switch (mp.cfg.aggregator) {
                    case Aggregator::TopT:
                    case Aggregator::Max: {
                        const int pooled = tape.top_t(cands, S);
                        for (int i = 0; i < S; ++i) q_slots[i] = tape.slice(pooled, i * d, d);
                        break;
                    }
                    case Aggregator::Mean:
                        q_slots[0] = tape.reduce(Tape::Op::ReduceMean, cands);
                        break;
                    case Aggregator::Sum:
                        q_slots[0] = tape.reduce(Tape::Op::ReduceSum, cands);
                        break;
                }
            }
            for (int i = 0; i < S; ++i) {
                const size_t idx = static_cast<size_t>(t) * S + i;
                const int parts[2] = {h[idx], q_slots[i]};
                h_next[idx] = tape.matmul(wupd_slot, tape.concat(parts));
            }
        }
        h.swap(h_next);
    }

    std::vector<int> slot_ids(S);
    for (NodeId t : targets) {
        if (g.node_type(t) != g.node_type(query))
            throw DataError("model tape: target node type differs from query type");
        for (int i = 0; i < S; ++i) slot_ids[i] = h[static_cast<size_t>(t) * S + i];
        const int cat = tape.concat(slot_ids);
        const int pred = tape.matmul(wdeco_slot, tape.relu(tape.matmul(wdech_slot, cat)));
        mt.pred_slots.push_back(pred);
    }
    if (!labels.empty()) mt.loss_slot = tape.mse(mt.pred_slots, labels);
}

// ---------------------------------------------------------------------------
// Checkpoints: one JSON document with config, schema fingerprint and all
// named weight tensors.
// ---------------------------------------------------------------------------

inline nlohmann::json tensor_to_json(const Tensor& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < t.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < t.cols; ++c) row.push_back(t.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Tensor tensor_from_json(const nlohmann::json& j) {
    const int rows = static_cast<int>(j.size());
    if (rows == 0) throw DataError("checkpoint: empty tensor");
    const int cols = static_cast<int>(j[0].size());
    Tensor t(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw DataError("checkpoint: ragged tensor");
        for (int c = 0; c < cols; ++c) t.at(r, c) = j[r][c].get<double>();
    }
    return t;
}

inline void save_checkpoint(const ModelParams& p, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["schema_fingerprint"] = p.schema_fingerprint;
    j["node_types"] = p.node_type_names;
    j["edge_types"] = p.edge_type_names;
    j["d"] = p.cfg.d;
    j["T"] = p.cfg.T;
    j["L"] = p.cfg.L;
    j["aggregator"] = aggregator_name(p.cfg.aggregator);
    j["use_node_type"] = p.cfg.use_node_type;
    j["use_edge_type"] = p.cfg.use_edge_type;
    nlohmann::json weights;
    p.for_each([&](const std::string& name, const Tensor& t) { weights[name] = tensor_to_json(t); });
    j["weights"] = std::move(weights);
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot write");
    out << j.dump() << "\n";
}

// Loads a checkpoint for use on `schema`. A fingerprint mismatch is an error
// unless allow_schema_mismatch, in which case weights are matched by type
// name.
inline ModelParams load_checkpoint(const std::string& path, const NetworkSchema& schema,
                                   bool allow_schema_mismatch = false) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    if (j.at("format_version").get<int>() != 1)
        throw DataError(path + ": unsupported checkpoint format version");

    ModelParams p;
    p.cfg.d = j.at("d").get<int>();
    p.cfg.T = j.at("T").get<int>();
    p.cfg.L = j.at("L").get<int>();
    p.cfg.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
    p.cfg.use_node_type = j.at("use_node_type").get<bool>();
    p.cfg.use_edge_type = j.at("use_edge_type").get<bool>();

    const uint64_t saved_fp = j.at("schema_fingerprint").get<uint64_t>();
    if (saved_fp != schema.fingerprint() && !allow_schema_mismatch)
        throw DataError(path + ": checkpoint schema fingerprint does not match the graph schema "
                               "(pass --allow-schema-mismatch to map types by name)");

    p.schema_fingerprint = schema.fingerprint();
    p.node_type_names = schema.node_type_names();
    for (const auto& et : schema.edge_types()) p.edge_type_names.push_back(et.name);

    const auto& weights = j.at("weights");
    auto fetch = [&](const std::string& name) {
        if (!weights.contains(name))
            throw DataError(path + ": checkpoint has no weight named '" + name + "'");
        return tensor_from_json(weights.at(name));
    };

    if (p.cfg.use_node_type) {
        for (const auto& name : p.node_type_names) p.w_node.push_back(fetch("W_node:" + name));
    } else {
        p.w_node.push_back(fetch("W_node:shared"));
    }
    if (p.cfg.use_edge_type)
        for (const auto& name : p.edge_type_names) p.e_edge.push_back(fetch("e_edge:" + name));
    p.w_msg = fetch("W_msg");
    p.w_update = fetch("W_update");
    p.w_dec_hidden = fetch("W_dec_hidden");
    p.w_dec_out = fetch("W_dec_out");
    return p;
}

}  // namespace neupath
