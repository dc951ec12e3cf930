#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/model.hpp"
#include "neupath/tensor.hpp"

namespace neupath {

// lr(step) = lr_min + (lr_max - lr_min)/2 * (1 + cos(pi * step / total)).
inline double cosine_lr(uint64_t step, uint64_t total_steps, double lr_max, double lr_min) {
    if (total_steps < 1) throw UsageError("cosine_lr: total_steps must be >= 1");
    if (step > total_steps) throw UsageError("cosine_lr: step past total_steps");
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(M_PI * frac));
}

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

struct AdamWState {
    std::vector<Tensor> m, v;
    uint64_t step = 0;

    static AdamWState like(const ModelParams& p) {
        AdamWState s;
        p.for_each([&](const std::string&, const Tensor& t) {
            s.m.emplace_back(t.rows, t.cols);
            s.v.emplace_back(t.rows, t.cols);
        });
        return s;
    }
};

// Decoupled weight decay with bias-corrected moments:
//   p <- p - lr * ( m_hat / (sqrt(v_hat) + eps) + wd * p )
inline void adamw_step(ModelParams& params, const std::vector<Tensor>& grads, AdamWState& state,
                       double lr, const AdamWConfig& cfg) {
    if (grads.size() != state.m.size())
        throw DataError("adamw: gradient count does not match parameter count");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    size_t k = 0;
    params.for_each([&](const std::string& name, Tensor& t) {
        const Tensor& g = grads[k];
        if (g.size() != t.size())
            throw DataError("adamw: gradient shape mismatch for " + name);
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (size_t i = 0; i < t.size(); ++i) {
            const double gi = g.data[i];
            if (!std::isfinite(gi))
                throw NumericError("adamw: non-finite gradient in " + name);
            m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
            v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
            const double m_hat = m.data[i] / bc1;
            const double v_hat = v.data[i] / bc2;
            t.data[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * t.data[i]);
        }
        ++k;
    });
}

}  // namespace neupath
