#include "ae1svm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ae1svm/errors.hpp"

namespace ae1svm {

namespace {

struct ClassCounts {
    std::size_t anomalies = 0;
    std::size_t normals = 0;
};

ClassCounts check_scored_set(const ScoredSet& s) {
    if (s.scores.size() != s.labels.size()) {
        throw MetricError("scored set: scores and labels differ in length");
    }
    if (s.scores.empty()) throw MetricError("scored set: empty");
    ClassCounts counts;
    for (int label : s.labels) {
        if (label == -1) {
            ++counts.anomalies;
        } else if (label == 1) {
            ++counts.normals;
        } else {
            throw MetricError("scored set: labels must be +1 or -1");
        }
    }
    if (counts.anomalies == 0 || counts.normals == 0) {
        throw MetricError("scored set: both classes required for curve metrics");
    }
    return counts;
}

// Indices sorted by descending anomaly score (-score); ties adjacent.
std::vector<std::size_t> order_by_anomaly_score(const ScoredSet& s) {
    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] < s.scores[b];
    });
    return order;
}

// Confusion counts per distinct threshold, sweeping most-anomalous first.
struct SweepPoint {
    double threshold;  // anomaly score of the tie group
    std::size_t tp;    // anomalies flagged
    std::size_t fp;    // normals flagged
};

std::vector<SweepPoint> threshold_sweep(const ScoredSet& s) {
    const std::vector<std::size_t> order = order_by_anomaly_score(s);
    std::vector<SweepPoint> sweep;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double score = s.scores[order[i]];
        while (i < order.size() && s.scores[order[i]] == score) {
            (s.labels[order[i]] == -1 ? tp : fp) += 1;
            ++i;
        }
        sweep.push_back({-score, tp, fp});
    }
    return sweep;
}

}  // namespace

double auroc(const ScoredSet& s) {
    const ClassCounts counts = check_scored_set(s);
    // ascending anomaly score, so ranks feed Mann-Whitney directly
    std::vector<std::size_t> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });

    double anomaly_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t ties_anomaly = 0;
        while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) {
            if (s.labels[order[j]] == -1) ++ties_anomaly;
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
        anomaly_rank_sum += midrank * static_cast<double>(ties_anomaly);
        i = j;
    }
    const double n_a = static_cast<double>(counts.anomalies);
    const double n_n = static_cast<double>(counts.normals);
    return (anomaly_rank_sum - n_a * (n_a + 1.0) / 2.0) / (n_a * n_n);
}

double auroc_trapezoid(const ScoredSet& s) {
    check_scored_set(s);
    const std::vector<RocPoint> curve = roc_curve(s);
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    }
    return area;
}

double auprc(const ScoredSet& s) {
    const ClassCounts counts = check_scored_set(s);
    const std::vector<SweepPoint> sweep = threshold_sweep(s);
    double area = 0.0;
    double prev_recall = 0.0;
    for (const SweepPoint& p : sweep) {
        const double recall = static_cast<double>(p.tp) / static_cast<double>(counts.anomalies);
        const double precision = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return area;
}

std::vector<RocPoint> roc_curve(const ScoredSet& s) {
    const ClassCounts counts = check_scored_set(s);
    const std::vector<SweepPoint> sweep = threshold_sweep(s);
    std::vector<RocPoint> curve;
    curve.reserve(sweep.size() + 1);
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    for (const SweepPoint& p : sweep) {
        curve.push_back({p.threshold,
                         static_cast<double>(p.fp) / static_cast<double>(counts.normals),
                         static_cast<double>(p.tp) / static_cast<double>(counts.anomalies)});
    }
    return curve;
}

std::vector<PrPoint> pr_curve(const ScoredSet& s) {
    const ClassCounts counts = check_scored_set(s);
    const std::vector<SweepPoint> sweep = threshold_sweep(s);
    std::vector<PrPoint> curve;
    curve.reserve(sweep.size());
    for (const SweepPoint& p : sweep) {
        curve.push_back({p.threshold,
                         static_cast<double>(p.tp) / static_cast<double>(counts.anomalies),
                         static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp)});
    }
    return curve;
}

Histogram histogram(const ScoredSet& s, int bins) {
    check_scored_set(s);
    if (bins < 1) throw ArgumentError("histogram: bins must be >= 1");

    const auto [lo_it, hi_it] = std::minmax_element(s.scores.begin(), s.scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi > lo) ? (hi - lo) : 0.0;

    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) {
        h.edges[static_cast<std::size_t>(b)] = lo + width * static_cast<double>(b) / bins;
    }
    h.edges.back() = hi;  // exact span regardless of rounding
    h.normal_counts.assign(static_cast<std::size_t>(bins), 0);
    h.anomaly_counts.assign(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        std::size_t bin = 0;
        if (width > 0.0) {
            bin = static_cast<std::size_t>((s.scores[i] - lo) / width * bins);
            bin = std::min(bin, static_cast<std::size_t>(bins) - 1);  // max lands in last bin
        }
        (s.labels[i] == -1 ? h.anomaly_counts : h.normal_counts)[bin] += 1;
    }
    return h;
}

}  // namespace ae1svm
