#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/graph.hpp"
#include "neupath/model.hpp"
#include "neupath/schema.hpp"
#include "neupath/synth.hpp"
#include "neupath/tape.hpp"

namespace neupath {

struct GradCheckConfig {
    uint64_t seed = 0;
    int d = 8;
    int T = 2;
    int L = 2;
    uint32_t nodes_per_type = 10;  // schema A-P-C, so ~3x this many nodes
    Aggregator aggregator = Aggregator::TopT;
    double h = 1e-5;
    double tol = 1e-4;
    size_t n_targets = 4;
    double min_pass_fraction = 0.95;
};

struct GradCheckReport {
    size_t n_coords = 0;
    size_t n_within_tol = 0;
    size_t n_failing = 0;
    size_t n_certified_boundary = 0;  // failing coords that straddle a selection boundary
    double max_rel_err = 0.0;
    double max_uncertified_rel_err = 0.0;
    bool pass = false;
};

namespace detail {

inline double loss_plain(const HinGraph& g, const ModelParams& params, NodeId query,
                         const std::vector<NodeId>& targets, const std::vector<double>& labels,
                         SelectionSignature* sig = nullptr) {
    const auto scores = forward_all(g, params, query, sig);
    double sq = 0.0;
    for (size_t i = 0; i < targets.size(); ++i) {
        const double diff = scores[g.local_index(targets[i])] - labels[i];
        sq += diff * diff;
    }
    return sq / static_cast<double>(targets.size());
}

}  // namespace detail

// Central finite differences against the tape gradient. The FD side uses only
// the tape-free forward pass, so the two routes are independent. A failing
// coordinate is accepted when the selection signature differs between
// theta +/- 2h (the coordinate sits within 2h of a pooling/ReLU boundary).
inline GradCheckReport gradcheck(const HinGraph& g, const ModelParams& params, NodeId query,
                                 const std::vector<NodeId>& targets,
                                 const std::vector<double>& labels, double h, double tol,
                                 double min_pass_fraction = 0.95) {
    ModelTape mt;
    build_model_tape(g, params, query, targets, labels, mt);
    mt.tape.backward(mt.loss_slot);
    std::vector<Tensor> analytic(params.num_tensors());
    for (size_t k = 0; k < mt.param_slots.size(); ++k)
        mt.tape.grad_tensor(mt.param_slots[k], analytic[k]);

    GradCheckReport rep;
    ModelParams probe = params;

    size_t ti = 0;
    probe.for_each([&](const std::string&, Tensor& t) {
        for (size_t i = 0; i < t.size(); ++i) {
            const double saved = t.data[i];

            t.data[i] = saved + h;
            const double f_plus = detail::loss_plain(g, probe, query, targets, labels);
            t.data[i] = saved - h;
            const double f_minus = detail::loss_plain(g, probe, query, targets, labels);
            t.data[i] = saved;

            const double g_fd = (f_plus - f_minus) / (2.0 * h);
            const double g_an = analytic[ti].data[i];
            const double rel = std::abs(g_an - g_fd) / std::max(std::abs(g_fd), 1e-8);

            ++rep.n_coords;
            rep.max_rel_err = std::max(rep.max_rel_err, rel);
            if (rel < tol) {
                ++rep.n_within_tol;
            } else {
                ++rep.n_failing;
                SelectionSignature sig_plus, sig_minus;
                t.data[i] = saved + 2.0 * h;
                detail::loss_plain(g, probe, query, targets, labels, &sig_plus);
                t.data[i] = saved - 2.0 * h;
                detail::loss_plain(g, probe, query, targets, labels, &sig_minus);
                t.data[i] = saved;
                if (!(sig_plus == sig_minus))
                    ++rep.n_certified_boundary;
                else
                    rep.max_uncertified_rel_err = std::max(rep.max_uncertified_rel_err, rel);
            }
        }
        ++ti;
    });

    rep.pass = rep.n_within_tol >=
                   static_cast<size_t>(std::ceil(min_pass_fraction * rep.n_coords)) &&
               rep.n_certified_boundary == rep.n_failing;
    return rep;
}

// Self-contained run on a seeded synthetic A-P-C graph with random labels;
// shared by the CLI command and the acceptance suite.
inline GradCheckReport run_gradcheck(const GradCheckConfig& cfg) {
    NetworkSchema schema({"A", "P", "C"}, {{"AP", 0, 1}, {"PC", 1, 2}});
    const uint32_t n = cfg.nodes_per_type;
    HinGraph g = synth_graph(schema, {n, n, n}, {2 * n, n}, cfg.seed * 7919 + 11);

    ModelConfig mc;
    mc.d = cfg.d;
    mc.T = cfg.T;
    mc.L = cfg.L;
    mc.aggregator = cfg.aggregator;
    ModelParams params = ModelParams::init(g.schema(), mc, cfg.seed);

    Rng rng(cfg.seed ^ 0xabcdef1234ull);
    const auto& anchors = g.nodes_of_type(0);
    const NodeId query = anchors[rng.below(anchors.size())];
    std::vector<NodeId> targets;
    std::vector<double> labels;
    for (size_t i = 0; i < std::min<size_t>(cfg.n_targets, anchors.size()); ++i) {
        targets.push_back(anchors[rng.below(anchors.size())]);
        labels.push_back(rng.real01());
    }
    return gradcheck(g, params, query, targets, labels, cfg.h, cfg.tol, cfg.min_pass_fraction);
}

}  // namespace neupath
