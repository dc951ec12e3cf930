#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "neupath/common.hpp"
#include "neupath/dataset.hpp"
#include "neupath/graph.hpp"
#include "neupath/model.hpp"
#include "neupath/optim.hpp"

namespace neupath {

struct TrainConfig {
    ModelConfig model;
    uint32_t epochs = 10;
    double lr_max = 1e-3;
    double lr_min = 1e-5;
    AdamWConfig adamw;
    uint64_t seed = 0;
    double train_fraction = 1.0;  // deterministic subsampling of train queries

    void validate() const {
        model.validate();
        if (epochs < 1) throw UsageError("train: epochs must be >= 1");
        if (!(lr_max >= lr_min) || !(lr_min > 0.0))
            throw UsageError("train: need lr_max >= lr_min > 0");
        if (train_fraction <= 0.0 || train_fraction > 1.0)
            throw UsageError("train: train_fraction must be in (0, 1]");
    }
};

struct EpochLog {
    uint32_t epoch;
    double train_mse;
    double val_mse;
    double lr_last;
};

struct TrainResult {
    ModelParams best;
    uint32_t best_epoch = 0;
    double best_val_mse = 0.0;
    std::vector<EpochLog> log;
    bool diverged = false;
};

namespace detail {

struct QueryBatch {
    NodeId query;
    std::vector<NodeId> targets;
    std::vector<double> labels;
};

inline std::vector<QueryBatch> group_by_query(const std::vector<TrainingSample>& samples,
                                              const std::vector<NodeId>& query_order) {
    std::unordered_map<NodeId, size_t> index;
    std::vector<QueryBatch> batches;
    for (NodeId q : query_order) {
        index[q] = batches.size();
        batches.push_back({q, {}, {}});
    }
    for (const auto& s : samples) {
        auto it = index.find(s.query);
        if (it == index.end()) continue;
        batches[it->second].targets.push_back(s.target);
        batches[it->second].labels.push_back(s.label);
    }
    std::erase_if(batches, [](const QueryBatch& b) { return b.targets.empty(); });
    return batches;
}

inline double validation_mse(const HinGraph& g, const ModelParams& params,
                             const std::vector<QueryBatch>& batches) {
    double sq = 0.0;
    size_t n = 0;
    std::vector<uint32_t> local(g.num_nodes(), 0);
    for (const auto& b : batches) {
        const auto scores = forward_all(g, params, b.query);
        const auto& anchors = g.nodes_of_type(g.node_type(b.query));
        for (uint32_t i = 0; i < anchors.size(); ++i) local[anchors[i]] = i;
        for (size_t i = 0; i < b.targets.size(); ++i) {
            const double diff = scores[local[b.targets[i]]] - b.labels[i];
            sq += diff * diff;
        }
        n += b.targets.size();
    }
    return n == 0 ? 0.0 : sq / static_cast<double>(n);
}

}  // namespace detail

// MSE training: one encoding and one optimizer step per query, cosine
// annealed AdamW across epochs * |train queries| steps, best checkpoint by
// validation loss. Divergence stops early and keeps the last good checkpoint.
inline TrainResult train(const HinGraph& g, const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();

    std::vector<NodeId> train_queries = ds.train_queries;
    const auto n_used = std::max<size_t>(
        1, static_cast<size_t>(std::llround(cfg.train_fraction * train_queries.size())));
    if (n_used < train_queries.size()) train_queries.resize(n_used);

    auto train_batches = detail::group_by_query(ds.train, train_queries);
    auto val_batches = detail::group_by_query(ds.val, ds.val_queries);
    if (train_batches.empty()) throw DataError("train: no training samples");

    ModelParams params = ModelParams::init(g.schema(), cfg.model, cfg.seed);
    AdamWState opt = AdamWState::like(params);
    const uint64_t total_steps = static_cast<uint64_t>(cfg.epochs) * train_batches.size();

    TrainResult result;
    result.best = params;
    result.best_val_mse = std::numeric_limits<double>::infinity();

    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<size_t> order(train_batches.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    ModelTape mt;
    std::vector<Tensor> grads(params.num_tensors());
    uint64_t step = 0;
    double lr = cfg.lr_max;
    bool warned_disconnected = false;

    for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double sq_sum = 0.0;
        size_t n_samples = 0;
        for (size_t oi = 0; oi < order.size(); ++oi) {
            const auto& batch = train_batches[order[oi]];
            build_model_tape(g, params, batch.query, batch.targets, batch.labels, mt);
            const double loss = mt.tape.scalar(mt.loss_slot);
            if (!std::isfinite(loss)) {
                log_warn("train: non-finite loss at epoch " + std::to_string(epoch) +
                         ", stopping with the best checkpoint so far");
                result.diverged = true;
                if (std::isinf(result.best_val_mse))
                    result.best_val_mse = detail::validation_mse(g, result.best, val_batches);
                return result;
            }
            sq_sum += loss * static_cast<double>(batch.targets.size());
            n_samples += batch.targets.size();

            mt.tape.backward(mt.loss_slot);
            for (size_t k = 0; k < mt.param_slots.size(); ++k) {
                mt.tape.grad_tensor(mt.param_slots[k], grads[k]);
                if (!warned_disconnected && !mt.tape.reached(mt.param_slots[k])) {
                    log_warn("train: a parameter tensor is disconnected from the loss; its "
                             "gradient is zero");
                    warned_disconnected = true;
                }
            }
            lr = cosine_lr(step, total_steps, cfg.lr_max, cfg.lr_min);
            try {
                adamw_step(params, grads, opt, lr, cfg.adamw);
            } catch (const NumericError& e) {
                log_warn(std::string("train: ") + e.what() + "; stopping with the best checkpoint");
                result.diverged = true;
                if (std::isinf(result.best_val_mse))
                    result.best_val_mse = detail::validation_mse(g, result.best, val_batches);
                return result;
            }
            ++step;
        }

        const double train_mse = n_samples ? sq_sum / static_cast<double>(n_samples) : 0.0;
        const double val_mse = detail::validation_mse(g, params, val_batches);
        result.log.push_back({epoch, train_mse, val_mse, lr});
        // with no validation set, the final model is the checkpoint
        if (val_batches.empty() || val_mse < result.best_val_mse) {
            result.best_val_mse = val_batches.empty() ? 0.0 : val_mse;
            result.best = params;
            result.best_epoch = epoch;
        }
    }
    return result;
}

}  // namespace neupath
