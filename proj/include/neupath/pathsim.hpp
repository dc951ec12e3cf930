#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"
#include "neupath/metapath.hpp"
#include "neupath/sparse_counts.hpp"

namespace neupath {

// Top-K result: entries sorted by score descending, ties by node id ascending.
struct RankedList {
    NodeId query = 0;
    size_t k = 0;
    std::vector<std::pair<NodeId, double>> entries;
};

// Exhaustively enumerates every walk from x whose node/edge type sequence
// matches p (nodes may repeat) and counts arrivals per endpoint. This is the
// reference semantics the matrix route is checked against.
inline std::vector<uint64_t> brute_force_counts(const HinGraph& g, const MetaPath& p, NodeId x) {
    if (g.node_type(x) != p.anchor_type())
        throw DataError("brute force count: source node type does not match meta-path anchor");
    std::vector<uint64_t> tally(g.num_nodes(), 0);
    const size_t hops = p.hops();

    // explicit stack of (node, depth)
    std::vector<std::pair<NodeId, size_t>> stack{{x, 0}};
    while (!stack.empty()) {
        auto [v, depth] = stack.back();
        stack.pop_back();
        if (depth == hops) {
            ++tally[v];
            continue;
        }
        const EdgeTypeId want_edge = p.edge_types()[depth];
        const NodeTypeId want_type = p.node_types()[depth + 1];
        for (const Neighbor& nb : g.neighbors(v))
            if (nb.edge_type == want_edge && g.node_type(nb.node) == want_type)
                stack.push_back({nb.node, depth + 1});
    }
    return tally;
}

inline uint64_t count_paths_bruteforce(const HinGraph& g, const MetaPath& p, NodeId x, NodeId y) {
    if (g.node_type(y) != p.tail_type())
        throw DataError("brute force count: target node type does not match meta-path tail");
    return brute_force_counts(g, p, x)[y];
}

// Ground-truth engine for one (graph, symmetric meta-path) pair. Exploits the
// palindrome structure: M = B * B^T for an even number of hops, and
// M = B * S * B^T with S the middle same-type adjacency for an odd number.
class PathSimEngine {
  public:
    PathSimEngine(const HinGraph& g, const MetaPath& p) : g_(&g), p_(p) {
        if (!p.is_symmetric())
            throw DataError("PathSim requires a symmetric meta-path");
        auto hops = hop_matrices(g, p);
        const size_t half = hops.size() / 2;

        SparseCountMatrix b;
        if (half == 0) {
            // single-hop palindrome: the half product is the identity
            b.row_type = b.col_type = p.anchor_type();
            b.rows = b.cols = static_cast<uint32_t>(g.nodes_of_type(p.anchor_type()).size());
            b.row_offsets.resize(b.rows + 1);
            for (uint32_t r = 0; r < b.rows; ++r) {
                b.row_offsets[r + 1] = r + 1;
                b.col_indices.push_back(r);
                b.values.push_back(1);
            }
        } else {
            b = std::move(hops[0]);
            for (size_t k = 1; k < half; ++k) b = multiply(b, hops[k]);
        }
        if (hops.size() % 2 == 1) middle_ = std::move(hops[half]);
        bt_ = b.transpose();
        b_ = std::move(b);

        anchor_nodes_ = &g.nodes_of_type(p.anchor_type());
        diag_.resize(b_.rows, 0);
        for (uint32_t r = 0; r < b_.rows; ++r) {
            auto row = sparse_row(r);
            if (middle_) {
                auto mid = row_times(row, *middle_);
                diag_[r] = sparse_dot(mid, row);
            } else {
                uint64_t d = 0;
                for (const auto& [c, v] : row) d = checked_add(d, checked_mul(v, v));
                diag_[r] = d;
            }
        }
    }

    const HinGraph& graph() const { return *g_; }
    const MetaPath& metapath() const { return p_; }

    // Self path count M[x,x] (the "visibility" of x).
    uint64_t self_count(NodeId x) const { return diag_[local(x)]; }

    uint64_t pair_count(NodeId x, NodeId y) const {
        auto bx = sparse_row(local(x));
        auto by = sparse_row(local(y));
        if (middle_) bx = row_times(bx, *middle_);
        return sparse_dot(bx, by);
    }

    double score(NodeId x, NodeId y) const {
        check_anchor(x);
        check_anchor(y);
        return to_score(pair_count(x, y), self_count(x), self_count(y));
    }

    // Full row of exact counts M[x, *] over anchor-type nodes, dense by local
    // index.
    std::vector<uint64_t> row_counts(NodeId x) const {
        check_anchor(x);
        auto bx = sparse_row(local(x));
        if (middle_) bx = row_times(bx, *middle_);
        std::vector<uint64_t> counts(b_.rows, 0);
        for (const auto& [j, v] : bx) {
            for (uint64_t k = bt_.row_offsets[j]; k < bt_.row_offsets[j + 1]; ++k) {
                const uint32_t y = bt_.col_indices[k];
                counts[y] = checked_add(counts[y], checked_mul(v, bt_.values[k]));
            }
        }
        return counts;
    }

    // Sparse PathSim row: nodes with zero numerator are omitted.
    std::vector<std::pair<NodeId, double>> row(NodeId x) const {
        const auto counts = row_counts(x);
        const uint64_t dx = diag_[local(x)];
        std::vector<std::pair<NodeId, double>> out;
        for (uint32_t yi = 0; yi < counts.size(); ++yi) {
            if (counts[yi] == 0) continue;
            out.emplace_back((*anchor_nodes_)[yi], to_score(counts[yi], dx, diag_[yi]));
        }
        return out;
    }

    RankedList topk(NodeId x, size_t k, bool include_self) const {
        if (k < 1) throw DataError("topk: k must be >= 1");
        auto entries = row(x);
        if (!include_self)
            std::erase_if(entries, [&](const auto& e) { return e.first == x; });
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (entries.size() > k) entries.resize(k);
        return RankedList{x, k, std::move(entries)};
    }

  private:
    uint32_t local(NodeId x) const { return g_->local_index(x); }

    void check_anchor(NodeId x) const {
        if (g_->node_type(x) != p_.anchor_type())
            throw DataError("PathSim: node " + std::to_string(x) +
                            " is not of the meta-path anchor type");
    }

    static double to_score(uint64_t cross, uint64_t dx, uint64_t dy) {
        const uint64_t den = checked_add(dx, dy);
        if (den == 0) return 0.0;  // no visibility, no similarity claim
        const uint64_t num = checked_mul(2, cross);
        return static_cast<double>(num) / static_cast<double>(den);
    }

    std::vector<std::pair<uint32_t, uint64_t>> sparse_row(uint32_t r) const {
        std::vector<std::pair<uint32_t, uint64_t>> out;
        out.reserve(b_.row_offsets[r + 1] - b_.row_offsets[r]);
        for (uint64_t k = b_.row_offsets[r]; k < b_.row_offsets[r + 1]; ++k)
            out.emplace_back(b_.col_indices[k], b_.values[k]);
        return out;
    }

    static uint64_t sparse_dot(const std::vector<std::pair<uint32_t, uint64_t>>& a,
                               const std::vector<std::pair<uint32_t, uint64_t>>& b) {
        uint64_t sum = 0;
        size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i].first < b[j].first)
                ++i;
            else if (a[i].first > b[j].first)
                ++j;
            else {
                sum = checked_add(sum, checked_mul(a[i].second, b[j].second));
                ++i;
                ++j;
            }
        }
        return sum;
    }

    const HinGraph* g_;
    MetaPath p_;
    SparseCountMatrix b_;   // half-path product, anchor rows
    SparseCountMatrix bt_;  // its transpose
    std::optional<SparseCountMatrix> middle_;
    std::vector<uint64_t> diag_;
    const std::vector<NodeId>* anchor_nodes_;
};

// Convenience single-shot wrappers. Bulk callers should hold a PathSimEngine.

inline double pathsim(const HinGraph& g, const MetaPath& p, NodeId x, NodeId y) {
    return PathSimEngine(g, p).score(x, y);
}

inline std::map<NodeId, double> pathsim_row(const HinGraph& g, const MetaPath& p, NodeId x) {
    std::map<NodeId, double> out;
    for (const auto& [node, score] : PathSimEngine(g, p).row(x)) out[node] = score;
    return out;
}

inline RankedList topk_search(const HinGraph& g, const MetaPath& p, NodeId x, size_t k,
                              bool include_self = false) {
    return PathSimEngine(g, p).topk(x, k, include_self);
}

}  // namespace neupath
