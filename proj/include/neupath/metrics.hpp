#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "neupath/common.hpp"
#include "neupath/dataset.hpp"
#include "neupath/graph.hpp"
#include "neupath/model.hpp"
#include "neupath/pathsim.hpp"

namespace neupath {

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.empty()) throw DataError("rmse: empty input");
    if (pred.size() != truth.size()) throw DataError("rmse: length mismatch");
    double sq = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - truth[i];
        sq += diff * diff;
    }
    return std::sqrt(sq / static_cast<double>(pred.size()));
}

// DCG@k = sum_i r_i / log2(i+1) over the predicted order; nDCG = DCG/IDCG,
// defined 0 when IDCG is 0.
inline double ndcg_at_k(std::span<const NodeId> predicted_ranking,
                        const std::unordered_map<NodeId, double>& relevance, size_t k) {
    if (k < 1) throw DataError("ndcg: k must be >= 1");
    double dcg = 0.0;
    const size_t limit = std::min(k, predicted_ranking.size());
    for (size_t i = 0; i < limit; ++i) {
        auto it = relevance.find(predicted_ranking[i]);
        const double r = it == relevance.end() ? 0.0 : it->second;
        dcg += r / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<double> rel;
    rel.reserve(relevance.size());
    for (const auto& [node, r] : relevance) rel.push_back(r);
    std::sort(rel.begin(), rel.end(), std::greater<>());
    double idcg = 0.0;
    for (size_t i = 0; i < std::min(k, rel.size()); ++i)
        idcg += rel[i] / std::log2(static_cast<double>(i) + 2.0);
    if (idcg == 0.0) return 0.0;
    return dcg / idcg;
}

// ---------------------------------------------------------------------------
// Score backends: anything that can produce a full row of predicted scores
// for a query, over all nodes of the query's type (ascending node id).
// ---------------------------------------------------------------------------

class ScoreBackend {
  public:
    virtual ~ScoreBackend() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> row_scores(NodeId query) const = 0;
};

class ExactBackend : public ScoreBackend {
  public:
    ExactBackend(const HinGraph& g, const MetaPath& p) : g_(&g), engine_(g, p) {}
    std::string name() const override { return "exact"; }
    std::vector<double> row_scores(NodeId query) const override {
        std::vector<double> out(g_->nodes_of_type(g_->node_type(query)).size(), 0.0);
        for (const auto& [node, score] : engine_.row(query)) out[g_->local_index(node)] = score;
        return out;
    }
    const PathSimEngine& engine() const { return engine_; }

  private:
    const HinGraph* g_;
    PathSimEngine engine_;
};

class ModelBackend : public ScoreBackend {
  public:
    ModelBackend(const HinGraph& g, const ModelParams& params, bool clamp = false)
        : g_(&g), params_(&params), clamp_(clamp) {}
    std::string name() const override { return "model"; }
    std::vector<double> row_scores(NodeId query) const override {
        auto scores = forward_all(*g_, *params_, query);
        if (clamp_)
            for (double& s : scores) s = std::clamp(s, 0.0, 1.0);
        return scores;
    }

  private:
    const HinGraph* g_;
    const ModelParams* params_;
    bool clamp_;
};

class ConstantBackend : public ScoreBackend {
  public:
    ConstantBackend(const HinGraph& g, NodeTypeId anchor, double value)
        : n_(g.nodes_of_type(anchor).size()), value_(value) {}
    std::string name() const override { return "constant"; }
    std::vector<double> row_scores(NodeId) const override {
        return std::vector<double>(n_, value_);
    }

  private:
    size_t n_;
    double value_;
};

// Seeded per-query random scores; useful as a ranking floor.
class RandomBackend : public ScoreBackend {
  public:
    RandomBackend(const HinGraph& g, NodeTypeId anchor, uint64_t seed)
        : n_(g.nodes_of_type(anchor).size()), seed_(seed) {}
    std::string name() const override { return "random"; }
    std::vector<double> row_scores(NodeId query) const override {
        Rng rng(seed_ ^ (0x5bf03635u + static_cast<uint64_t>(query) * 0x9e3779b97f4a7c15ull));
        std::vector<double> out(n_);
        for (double& v : out) v = rng.real01();
        return out;
    }

  private:
    size_t n_;
    uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Evaluation harnesses.
// ---------------------------------------------------------------------------

struct EvalReport {
    std::string backend;
    std::string metapath;
    size_t k = 10;
    bool include_self = false;
    size_t n_queries = 0;
    size_t n_pairs = 0;
    double rmse_all = 0.0;
    double ndcg_mean = 0.0;
    std::vector<double> per_query_rmse;
    std::vector<double> per_query_ndcg;
    size_t zero_idcg_queries = 0;
    double seconds_rmse = 0.0;
    double seconds_ndcg = 0.0;
    std::string config_fingerprint;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["backend"] = backend;
        j["metapath"] = metapath;
        j["k"] = k;
        j["include_self"] = include_self;
        j["n_queries"] = n_queries;
        j["n_pairs"] = n_pairs;
        j["rmse"] = rmse_all;
        j["ndcg_mean"] = ndcg_mean;
        j["per_query_rmse"] = per_query_rmse;
        j["per_query_ndcg"] = per_query_ndcg;
        j["zero_idcg_queries"] = zero_idcg_queries;
        j["seconds_rmse"] = seconds_rmse;
        j["seconds_ndcg"] = seconds_ndcg;
        j["config_fingerprint"] = config_fingerprint;
        return j;
    }
};

namespace detail {

inline std::vector<double> dense_truth(const HinGraph& g, NodeTypeId anchor,
                                       const std::vector<std::pair<NodeId, double>>& row) {
    std::vector<double> truth(g.nodes_of_type(anchor).size(), 0.0);
    for (const auto& [node, score] : row) truth[g.local_index(node)] = score;
    return truth;
}

}  // namespace detail

// RMSE over every (test query, same-type target) pair; rows are full exact
// rows, so targets absent from a row count as ground-truth zero.
inline EvalReport evaluate_approximation(const ScoreBackend& backend, const HinGraph& g,
                                         const Dataset& ds) {
    if (ds.test_queries.empty()) throw DataError("evaluate: no test queries");
    EvalReport rep;
    rep.backend = backend.name();
    rep.metapath = ds.metapath_spec;
    rep.n_queries = ds.test_queries.size();
    const auto t0 = std::chrono::steady_clock::now();

    double sq = 0.0;
    size_t n = 0;
    for (size_t qi = 0; qi < ds.test_queries.size(); ++qi) {
        const auto pred = backend.row_scores(ds.test_queries[qi]);
        const auto truth = detail::dense_truth(g, ds.anchor_type, ds.test_rows[qi]);
        if (pred.size() != truth.size())
            throw DataError("evaluate: backend row length mismatch");
        double q_sq = 0.0;
        for (size_t i = 0; i < pred.size(); ++i) {
            const double diff = pred[i] - truth[i];
            q_sq += diff * diff;
        }
        rep.per_query_rmse.push_back(std::sqrt(q_sq / static_cast<double>(pred.size())));
        sq += q_sq;
        n += pred.size();
    }
    rep.n_pairs = n;
    rep.rmse_all = std::sqrt(sq / static_cast<double>(n));
    rep.seconds_rmse = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Ranking quality: candidates are all same-type nodes (minus the query unless
// include_self), ordered by predicted score with ties on ascending node id;
// relevance grades are the exact PathSim scores.
inline EvalReport evaluate_search(const ScoreBackend& backend, const HinGraph& g, const Dataset& ds,
                                  size_t k, bool include_self) {
    if (ds.test_queries.empty()) throw DataError("evaluate: no test queries");
    EvalReport rep;
    rep.backend = backend.name();
    rep.metapath = ds.metapath_spec;
    rep.k = k;
    rep.include_self = include_self;
    rep.n_queries = ds.test_queries.size();
    const auto t0 = std::chrono::steady_clock::now();

    const auto& anchors = g.nodes_of_type(ds.anchor_type);
    double ndcg_sum = 0.0;
    for (size_t qi = 0; qi < ds.test_queries.size(); ++qi) {
        const NodeId query = ds.test_queries[qi];
        const auto pred = backend.row_scores(query);

        std::vector<NodeId> ranking;
        ranking.reserve(anchors.size());
        std::vector<size_t> order(anchors.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (pred[a] != pred[b]) return pred[a] > pred[b];
            return anchors[a] < anchors[b];
        });
        for (size_t idx : order) {
            if (!include_self && anchors[idx] == query) continue;
            ranking.push_back(anchors[idx]);
        }

        std::unordered_map<NodeId, double> relevance;
        for (const auto& [node, score] : ds.test_rows[qi]) {
            if (!include_self && node == query) continue;
            relevance[node] = score;
        }
        const double nd = ndcg_at_k(ranking, relevance, k);
        if (relevance.empty() ||
            std::all_of(relevance.begin(), relevance.end(),
                        [](const auto& kv) { return kv.second == 0.0; }))
            ++rep.zero_idcg_queries;
        rep.per_query_ndcg.push_back(nd);
        ndcg_sum += nd;
    }
    rep.ndcg_mean = ndcg_sum / static_cast<double>(ds.test_queries.size());
    rep.seconds_ndcg = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Sweep tables: one TSV row per configuration plus two-column plot series.
// ---------------------------------------------------------------------------

struct SweepRow {
    std::string label;
    double x = 0.0;  // swept value (T, train fraction, node count, ...)
    EvalReport report;
};

inline void sweep_report(const std::vector<SweepRow>& rows, const std::string& out_dir,
                         const std::string& x_name = "x") {
    if (rows.empty()) throw DataError("sweep_report: no results");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ofstream table(fs::path(out_dir) / "sweep_table.tsv");
    table << "label\t" << x_name << "\trmse\tndcg_mean\tseconds_rmse\tseconds_ndcg\n";
    for (const auto& r : rows)
        table << r.label << "\t" << format_score(r.x) << "\t" << format_score(r.report.rmse_all)
              << "\t" << format_score(r.report.ndcg_mean) << "\t"
              << format_score(r.report.seconds_rmse) << "\t"
              << format_score(r.report.seconds_ndcg) << "\n";

    auto series = [&](const std::string& file, auto getter) {
        std::ofstream out(fs::path(out_dir) / file);
        for (const auto& r : rows)
            out << format_score(r.x) << "\t" << format_score(getter(r.report)) << "\n";
    };
    series("rmse_vs_" + x_name + ".tsv", [](const EvalReport& r) { return r.rmse_all; });
    series("ndcg_vs_" + x_name + ".tsv", [](const EvalReport& r) { return r.ndcg_mean; });
}

// Least-squares line fit; returns (slope, intercept, r_squared).
struct LineFit {
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw DataError("fit_line: need >= 2 points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LineFit f;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NumericError("fit_line: degenerate x values");
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double fit = f.slope * xs[i] + f.intercept;
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    f.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

}  // namespace neupath
