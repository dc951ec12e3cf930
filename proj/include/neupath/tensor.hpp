#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "neupath/common.hpp"

namespace neupath {

// Dense row-major matrix of doubles. Column vectors are (rows x 1).
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Tensor(int r, int c, std::initializer_list<double> values) : rows(r), cols(c), data(values) {
        if (data.size() != static_cast<size_t>(r) * c)
            throw DataError("Tensor: initializer size does not match shape");
    }

    size_t size() const { return data.size(); }
    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

namespace kernels {

// out = a (m x k) * b (k x n), row-major. The j-loop is innermost with a
// scalar accumulator so that the n == 1 case is the exact matvec used by the
// tape-free forward pass (bit-identical results between the two paths).
inline void matmul(const double* a, int m, int k, const double* b, int n, double* out) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            const double* arow = a + static_cast<size_t>(i) * k;
            for (int t = 0; t < k; ++t) acc += arow[t] * b[static_cast<size_t>(t) * n + j];
            out[static_cast<size_t>(i) * n + j] = acc;
        }
    }
}

// Element-wise top-T selection over n candidate vectors of width d.
// slot i, dimension j = i-th largest candidate value at j; ties go to the
// lowest candidate index. With n < T, missing slots repeat slot 0. Routes
// record the winning candidate ordinal per (slot, dimension).
inline void select_top_t(const double* const* cands, int n, int d, int T, double* out,
                         int32_t* routes) {
    for (int j = 0; j < d; ++j) {
        // insertion into a T-slot leaderboard; strict '>' keeps ties on the
        // earlier candidate
        int filled = 0;
        for (int c = 0; c < n; ++c) {
            const double v = cands[c][j];
            int pos = filled;
            while (pos > 0 && v > out[static_cast<size_t>(pos - 1) * d + j]) --pos;
            if (pos >= T) continue;
            const int last = filled < T ? filled : T - 1;
            for (int s = last; s > pos; --s) {
                out[static_cast<size_t>(s) * d + j] = out[static_cast<size_t>(s - 1) * d + j];
                routes[static_cast<size_t>(s) * d + j] = routes[static_cast<size_t>(s - 1) * d + j];
            }
            out[static_cast<size_t>(pos) * d + j] = v;
            routes[static_cast<size_t>(pos) * d + j] = c;
            if (filled < T) ++filled;
        }
        for (int s = filled; s < T; ++s) {
            out[static_cast<size_t>(s) * d + j] = out[j];
            routes[static_cast<size_t>(s) * d + j] = routes[j];
        }
    }
}

}  // namespace kernels

}  // namespace neupath
