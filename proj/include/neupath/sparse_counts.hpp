#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"
#include "neupath/metapath.hpp"

namespace neupath {

// Integer path-count matrix in CSR layout. Row/column indices are local
// per-type indices (position within nodes_of_type). Stored values are > 0 and
// column indices are strictly increasing within a row.
struct SparseCountMatrix {
    NodeTypeId row_type = 0;
    NodeTypeId col_type = 0;
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<uint64_t> row_offsets;  // rows + 1
    std::vector<uint32_t> col_indices;
    std::vector<uint64_t> values;
    bool overflow = false;  // set when checked arithmetic aborted the build

    uint64_t nnz() const { return values.size(); }

    uint64_t at(uint32_t r, uint32_t c) const {
        const uint32_t* begin = col_indices.data() + row_offsets[r];
        const uint32_t* end = col_indices.data() + row_offsets[r + 1];
        const uint32_t* it = std::lower_bound(begin, end, c);
        if (it == end || *it != c) return 0;
        return values[it - col_indices.data()];
    }

    SparseCountMatrix transpose() const {
        SparseCountMatrix t;
        t.row_type = col_type;
        t.col_type = row_type;
        t.rows = cols;
        t.cols = rows;
        t.row_offsets.assign(cols + 1, 0);
        for (uint32_t c : col_indices) t.row_offsets[c + 1]++;
        for (uint32_t r = 0; r < cols; ++r) t.row_offsets[r + 1] += t.row_offsets[r];
        t.col_indices.resize(nnz());
        t.values.resize(nnz());
        std::vector<uint64_t> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
        for (uint32_t r = 0; r < rows; ++r) {
            for (uint64_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
                uint64_t pos = cursor[col_indices[k]]++;
                t.col_indices[pos] = r;
                t.values[pos] = values[k];
            }
        }
        return t;
    }
};

// 0/1 biadjacency of one edge type, oriented from_type -> to_type.
inline SparseCountMatrix biadjacency(const HinGraph& g, EdgeTypeId r, NodeTypeId from_type,
                                     NodeTypeId to_type) {
    if (!g.schema().edge_type_connects(r, from_type, to_type))
        throw DataError("biadjacency: edge type '" + g.schema().edge_type(r).name +
                        "' does not connect the requested types");
    const auto& row_nodes = g.nodes_of_type(from_type);
    const auto& col_nodes = g.nodes_of_type(to_type);

    SparseCountMatrix m;
    m.row_type = from_type;
    m.col_type = to_type;
    m.rows = static_cast<uint32_t>(row_nodes.size());
    m.cols = static_cast<uint32_t>(col_nodes.size());
    m.row_offsets.assign(m.rows + 1, 0);

    // local index of every to_type node, dense lookup by node id
    std::vector<uint32_t> local(g.num_nodes(), 0);
    for (uint32_t i = 0; i < col_nodes.size(); ++i) local[col_nodes[i]] = i;

    for (uint32_t i = 0; i < row_nodes.size(); ++i) {
        for (const Neighbor& nb : g.neighbors(row_nodes[i])) {
            if (nb.edge_type != r) continue;
            if (g.node_type(nb.node) != to_type) continue;  // same-type guard for a==b types
            m.col_indices.push_back(local[nb.node]);
            m.values.push_back(1);
        }
        m.row_offsets[i + 1] = m.col_indices.size();
        // adjacency is sorted by node id, so local col indices are increasing
    }
    return m;
}

// CSR product with checked 64-bit arithmetic; throws NumericError on overflow.
inline SparseCountMatrix multiply(const SparseCountMatrix& a, const SparseCountMatrix& b) {
    if (a.cols != b.rows || a.col_type != b.row_type)
        throw DataError("sparse multiply: dimension/type mismatch");

    SparseCountMatrix c;
    c.row_type = a.row_type;
    c.col_type = b.col_type;
    c.rows = a.rows;
    c.cols = b.cols;
    c.row_offsets.assign(a.rows + 1, 0);

    std::vector<uint64_t> acc(b.cols, 0);
    std::vector<uint32_t> touched;
    touched.reserve(b.cols);

    for (uint32_t i = 0; i < a.rows; ++i) {
        touched.clear();
        for (uint64_t ka = a.row_offsets[i]; ka < a.row_offsets[i + 1]; ++ka) {
            const uint32_t j = a.col_indices[ka];
            const uint64_t va = a.values[ka];
            for (uint64_t kb = b.row_offsets[j]; kb < b.row_offsets[j + 1]; ++kb) {
                const uint32_t k = b.col_indices[kb];
                if (acc[k] == 0) touched.push_back(k);
                uint64_t prod;
                try {
                    prod = checked_mul(va, b.values[kb]);
                    acc[k] = checked_add(acc[k], prod);
                } catch (const NumericError&) {
                    c.overflow = true;
                    throw NumericError("path count overflow while multiplying count matrices");
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        for (uint32_t k : touched) {
            c.col_indices.push_back(k);
            c.values.push_back(acc[k]);
            acc[k] = 0;
        }
        c.row_offsets[i + 1] = c.col_indices.size();
    }
    return c;
}

// Sparse row vector (over a.rows' local indices) times CSR matrix.
// Entries of `row` are (local col index, count), sorted, used as x^T * a.
inline std::vector<std::pair<uint32_t, uint64_t>> row_times(
    const std::vector<std::pair<uint32_t, uint64_t>>& row, const SparseCountMatrix& a) {
    std::vector<uint64_t> acc(a.cols, 0);
    std::vector<uint32_t> touched;
    for (const auto& [j, v] : row) {
        for (uint64_t k = a.row_offsets[j]; k < a.row_offsets[j + 1]; ++k) {
            const uint32_t col = a.col_indices[k];
            if (acc[col] == 0) touched.push_back(col);
            acc[col] = checked_add(acc[col], checked_mul(v, a.values[k]));
        }
    }
    std::sort(touched.begin(), touched.end());
    std::vector<std::pair<uint32_t, uint64_t>> out;
    out.reserve(touched.size());
    for (uint32_t col : touched) out.emplace_back(col, acc[col]);
    return out;
}

// Hop matrices W_R1 .. W_Rl of a meta-path, each oriented along the path.
inline std::vector<SparseCountMatrix> hop_matrices(const HinGraph& g, const MetaPath& p) {
    std::vector<SparseCountMatrix> hops;
    hops.reserve(p.hops());
    for (size_t k = 0; k < p.hops(); ++k)
        hops.push_back(biadjacency(g, p.edge_types()[k], p.node_types()[k], p.node_types()[k + 1]));
    return hops;
}

// Commuting matrix M = W_R1 * ... * W_Rl. With restrict_rows given, only the
// listed rows (node ids of the anchor type) are computed; other rows are empty.
inline SparseCountMatrix commuting_matrix(const HinGraph& g, const MetaPath& p,
                                          const std::vector<NodeId>* restrict_rows = nullptr) {
    auto hops = hop_matrices(g, p);

    if (!restrict_rows) {
        SparseCountMatrix m = std::move(hops[0]);
        for (size_t k = 1; k < hops.size(); ++k) m = multiply(m, hops[k]);
        return m;
    }

    // vector-times-chain, one source row at a time
    SparseCountMatrix m;
    m.row_type = p.anchor_type();
    m.col_type = p.tail_type();
    m.rows = static_cast<uint32_t>(g.nodes_of_type(p.anchor_type()).size());
    m.cols = static_cast<uint32_t>(g.nodes_of_type(p.tail_type()).size());
    m.row_offsets.assign(m.rows + 1, 0);

    std::vector<std::vector<std::pair<uint32_t, uint64_t>>> rows(m.rows);
    for (NodeId x : *restrict_rows) {
        if (g.node_type(x) != p.anchor_type())
            throw DataError("commuting_matrix: node " + std::to_string(x) +
                            " is not of the meta-path anchor type");
        const uint32_t xi = g.local_index(x);
        std::vector<std::pair<uint32_t, uint64_t>> row{{xi, 1}};
        for (const auto& hop : hops) row = row_times(row, hop);
        rows[xi] = std::move(row);
    }
    for (uint32_t r = 0; r < m.rows; ++r) {
        for (const auto& [c, v] : rows[r]) {
            m.col_indices.push_back(c);
            m.values.push_back(v);
        }
        m.row_offsets[r + 1] = m.col_indices.size();
    }
    return m;
}

}  // namespace neupath
