#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/tensor.hpp"

namespace neupath {

// Reverse-mode tape over the handful of primitives the model needs. Slots are
// created in topological order by construction; values live in one arena so a
// tape can be reset and rebuilt without reallocating.
class Tape {
  public:
    enum class Op : uint8_t {
        Leaf,
        MatMul,
        Concat,
        Slice,
        Relu,
        TopT,
        ReduceMean,
        ReduceSum,
        ReduceMax,
        Mse,
    };

    int leaf(const Tensor& t) {
        int s = new_node(Op::Leaf, t.rows, t.cols);
        std::copy(t.data.begin(), t.data.end(), val_.begin() + nodes_[s].off);
        return s;
    }

    int zeros(int rows, int cols) { return new_node(Op::Leaf, rows, cols); }

    int matmul(int a, int b) {
        const int m = nodes_[a].rows, k = nodes_[a].cols;
        const int kb = nodes_[b].rows, n = nodes_[b].cols;
        if (k != kb) throw DataError("tape matmul: inner dimensions disagree");
        int s = new_node(Op::MatMul, m, n);
        nodes_[s].a = a;
        nodes_[s].b = b;
        kernels::matmul(val_.data() + nodes_[a].off, m, k, val_.data() + nodes_[b].off, n,
                        val_.data() + nodes_[s].off);
        return s;
    }

    // Stacks column vectors.
    int concat(std::span<const int> parts) {
        if (parts.empty()) throw DataError("tape concat: empty input");
        int total = 0;
        for (int p : parts) {
            if (nodes_[p].cols != 1) throw DataError("tape concat: expects column vectors");
            total += nodes_[p].rows;
        }
        int s = new_node(Op::Concat, total, 1);
        nodes_[s].args_begin = static_cast<int>(args_.size());
        for (int p : parts) args_.push_back(p);
        nodes_[s].args_end = static_cast<int>(args_.size());
        double* out = val_.data() + nodes_[s].off;
        for (int p : parts) {
            const double* src = val_.data() + nodes_[p].off;
            out = std::copy(src, src + nodes_[p].rows, out);
        }
        return s;
    }

    int slice(int src, int row0, int nrows) {
        if (nodes_[src].cols != 1 || row0 < 0 || row0 + nrows > nodes_[src].rows)
            throw DataError("tape slice: range out of bounds");
        int s = new_node(Op::Slice, nrows, 1);
        nodes_[s].a = src;
        nodes_[s].b = row0;
        const double* from = val_.data() + nodes_[src].off + row0;
        std::copy(from, from + nrows, val_.begin() + nodes_[s].off);
        return s;
    }

    int relu(int x) {
        const int r = nodes_[x].rows, c = nodes_[x].cols;
        int s = new_node(Op::Relu, r, c);
        nodes_[s].a = x;
        const double* in = val_.data() + nodes_[x].off;
        double* out = val_.data() + nodes_[s].off;
        for (size_t i = 0; i < static_cast<size_t>(r) * c; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
        return s;
    }

    // Element-wise top-T pooling over candidate column vectors of equal width.
    // Produces a stacked (T*d x 1) slot; use slice() to address slot i.
    int top_t(std::span<const int> cands, int T) {
        if (cands.empty()) throw DataError("tape top_t: empty candidate list");
        if (T < 1) throw DataError("tape top_t: T must be >= 1");
        return select_node(Op::TopT, cands, T);
    }

    int reduce(Op kind, std::span<const int> cands) {
        if (cands.empty()) throw DataError("tape reduce: empty candidate list");
        if (kind == Op::ReduceMax) return select_node(Op::ReduceMax, cands, 1);
        if (kind != Op::ReduceMean && kind != Op::ReduceSum)
            throw DataError("tape reduce: unsupported kind");
        const int d = nodes_[cands[0]].rows;
        for (int c : cands)
            if (nodes_[c].rows != d || nodes_[c].cols != 1)
                throw DataError("tape reduce: candidate shape mismatch");
        int s = new_node(kind, d, 1);
        nodes_[s].args_begin = static_cast<int>(args_.size());
        for (int c : cands) args_.push_back(c);
        nodes_[s].args_end = static_cast<int>(args_.size());
        double* out = val_.data() + nodes_[s].off;
        for (int c : cands) {
            const double* in = val_.data() + nodes_[c].off;
            for (int j = 0; j < d; ++j) out[j] += in[j];
        }
        if (kind == Op::ReduceMean)
            for (int j = 0; j < d; ++j) out[j] /= static_cast<double>(cands.size());
        return s;
    }

    // Mean squared error over scalar prediction slots against fixed labels.
    int mse(std::span<const int> preds, std::span<const double> labels) {
        if (preds.empty()) throw DataError("tape mse: empty input");
        if (preds.size() != labels.size()) throw DataError("tape mse: length mismatch");
        for (int p : preds)
            if (nodes_[p].size() != 1) throw DataError("tape mse: predictions must be scalar");
        int s = new_node(Op::Mse, 1, 1);
        nodes_[s].args_begin = static_cast<int>(args_.size());
        for (int p : preds) args_.push_back(p);
        nodes_[s].args_end = static_cast<int>(args_.size());
        nodes_[s].aux_begin = static_cast<int>(labels_.size());
        labels_.insert(labels_.end(), labels.begin(), labels.end());
        double acc = 0.0;
        for (size_t i = 0; i < preds.size(); ++i) {
            const double diff = val_[nodes_[preds[i]].off] - labels[i];
            acc += diff * diff;
        }
        val_[nodes_[s].off] = acc / static_cast<double>(preds.size());
        return s;
    }

    int rows(int s) const { return nodes_[s].rows; }
    int cols(int s) const { return nodes_[s].cols; }
    const double* value(int s) const { return val_.data() + nodes_[s].off; }
    double scalar(int s) const { return val_[nodes_[s].off]; }
    size_t num_nodes() const { return nodes_.size(); }

    // Reverse pass. Only nodes that reach `loss` are processed; a leaf that
    // does not reach it keeps a zero gradient and reports reached() == false.
    void backward(int loss) {
        if (nodes_[loss].size() != 1) throw DataError("tape backward: loss must be scalar");
        grad_.assign(val_.size(), 0.0);
        reached_.assign(nodes_.size(), 0);
        reached_[loss] = 1;
        grad_[nodes_[loss].off] = 1.0;

        for (int s = loss; s >= 0; --s) {
            if (!reached_[s]) continue;
            const Node& n = nodes_[s];
            const double* g = grad_.data() + n.off;
            switch (n.kind) {
                case Op::Leaf:
                    break;
                case Op::MatMul: {
                    const Node& na = nodes_[n.a];
                    const Node& nb = nodes_[n.b];
                    reached_[n.a] = reached_[n.b] = 1;
                    const double* av = val_.data() + na.off;
                    const double* bv = val_.data() + nb.off;
                    double* ga = grad_.data() + na.off;
                    double* gb = grad_.data() + nb.off;
                    const int m = na.rows, k = na.cols, c = nb.cols;
                    for (int i = 0; i < m; ++i)
                        for (int t = 0; t < k; ++t) {
                            double acc = 0.0;
                            for (int j = 0; j < c; ++j)
                                acc += g[static_cast<size_t>(i) * c + j] *
                                       bv[static_cast<size_t>(t) * c + j];
                            ga[static_cast<size_t>(i) * k + t] += acc;
                        }
                    for (int t = 0; t < k; ++t)
                        for (int j = 0; j < c; ++j) {
                            double acc = 0.0;
                            for (int i = 0; i < m; ++i)
                                acc += av[static_cast<size_t>(i) * k + t] *
                                       g[static_cast<size_t>(i) * c + j];
                            gb[static_cast<size_t>(t) * c + j] += acc;
                        }
                    break;
                }
                case Op::Concat: {
                    size_t pos = 0;
                    for (int ai = n.args_begin; ai < n.args_end; ++ai) {
                        const int p = args_[ai];
                        reached_[p] = 1;
                        double* gp = grad_.data() + nodes_[p].off;
                        for (int r = 0; r < nodes_[p].rows; ++r) gp[r] += g[pos + r];
                        pos += nodes_[p].rows;
                    }
                    break;
                }
                case Op::Slice: {
                    reached_[n.a] = 1;
                    double* gs = grad_.data() + nodes_[n.a].off + n.b;
                    for (int r = 0; r < n.rows; ++r) gs[r] += g[r];
                    break;
                }
                case Op::Relu: {
                    reached_[n.a] = 1;
                    const double* x = val_.data() + nodes_[n.a].off;
                    double* gx = grad_.data() + nodes_[n.a].off;
                    for (size_t i = 0; i < n.size(); ++i)
                        if (x[i] > 0.0) gx[i] += g[i];
                    break;
                }
                case Op::TopT:
                case Op::ReduceMax: {
                    // routes hold the winning candidate ordinal per output dim
                    const int width = nodes_[args_[n.args_begin]].rows;
                    for (int ai = n.args_begin; ai < n.args_end; ++ai) reached_[args_[ai]] = 1;
                    for (int idx = 0; idx < n.rows; ++idx) {
                        const int32_t winner = aux_[n.aux_begin + idx];
                        double* gw = grad_.data() + nodes_[args_[n.args_begin + winner]].off;
                        gw[idx % width] += g[idx];
                    }
                    break;
                }
                case Op::ReduceMean:
                case Op::ReduceSum: {
                    const int cnt = n.args_end - n.args_begin;
                    const double scale = n.kind == Op::ReduceMean ? 1.0 / cnt : 1.0;
                    for (int ai = n.args_begin; ai < n.args_end; ++ai) {
                        const int p = args_[ai];
                        reached_[p] = 1;
                        double* gp = grad_.data() + nodes_[p].off;
                        for (int r = 0; r < n.rows; ++r) gp[r] += scale * g[r];
                    }
                    break;
                }
                case Op::Mse: {
                    const int m = n.args_end - n.args_begin;
                    for (int i = 0; i < m; ++i) {
                        const int p = args_[n.args_begin + i];
                        reached_[p] = 1;
                        const double diff = val_[nodes_[p].off] - labels_[n.aux_begin + i];
                        grad_[nodes_[p].off] += g[0] * 2.0 * diff / static_cast<double>(m);
                    }
                    break;
                }
            }
        }
    }

    const double* grad(int s) const { return grad_.data() + nodes_[s].off; }
    bool reached(int s) const { return !reached_.empty() && reached_[s] != 0; }

    void grad_tensor(int s, Tensor& out) const {
        out.rows = nodes_[s].rows;
        out.cols = nodes_[s].cols;
        out.data.assign(grad_.begin() + nodes_[s].off,
                        grad_.begin() + nodes_[s].off + nodes_[s].size());
    }

    void reset() {
        nodes_.clear();
        val_.clear();
        grad_.clear();
        args_.clear();
        aux_.clear();
        labels_.clear();
        reached_.clear();
    }

  private:
    struct Node {
        Op kind;
        int rows, cols;
        size_t off;
        int a = -1, b = -1;
        int args_begin = 0, args_end = 0;
        int aux_begin = 0;
        size_t size() const { return static_cast<size_t>(rows) * cols; }
    };

    int new_node(Op kind, int rows, int cols) {
        Node n;
        n.kind = kind;
        n.rows = rows;
        n.cols = cols;
        n.off = val_.size();
        val_.resize(val_.size() + n.size(), 0.0);
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Shared body of top_t / reduce-max: the node is allocated first so that
    // candidate value pointers are taken from the final arena.
    int select_node(Op kind, std::span<const int> cands, int T) {
        const int d = nodes_[cands[0]].rows;
        for (int c : cands)
            if (nodes_[c].rows != d || nodes_[c].cols != 1)
                throw DataError("tape select: candidate shape mismatch");
        int s = new_node(kind, T * d, 1);
        nodes_[s].args_begin = static_cast<int>(args_.size());
        for (int c : cands) args_.push_back(c);
        nodes_[s].args_end = static_cast<int>(args_.size());
        nodes_[s].aux_begin = static_cast<int>(aux_.size());
        aux_.resize(aux_.size() + static_cast<size_t>(T) * d);
        scratch_ptrs_.clear();
        for (int c : cands) scratch_ptrs_.push_back(val_.data() + nodes_[c].off);
        kernels::select_top_t(scratch_ptrs_.data(), static_cast<int>(cands.size()), d, T,
                              val_.data() + nodes_[s].off, aux_.data() + nodes_[s].aux_begin);
        return s;
    }

    std::vector<Node> nodes_;
    std::vector<double> val_, grad_;
    std::vector<int> args_;
    std::vector<int32_t> aux_;
    std::vector<double> labels_;
    std::vector<uint8_t> reached_;
    std::vector<const double*> scratch_ptrs_;
};

}  // namespace neupath
