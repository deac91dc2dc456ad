#pragma once

#include <vector>

#include "ae1svm/matrix.hpp"

namespace ae1svm {

// Decision scores (higher = more normal) with ground-truth labels.
// For both curve metrics the anomaly class (-1) is the positive class
// and samples are ranked by anomaly score = -score.
struct ScoredSet {
    Vector scores;
    std::vector<int> labels;  // +1 normal, -1 anomaly
};

// Rank form: P(anomaly ranked above normal) + 1/2 P(tie).
double auroc(const ScoredSet& s);
// Trapezoidal integration of the ROC curve; agrees with auroc() to 1e-10.
double auroc_trapezoid(const ScoredSet& s);

// Average precision: sum (R_i - R_{i-1}) P_i over descending
// anomaly-score thresholds, ties grouped.
double auprc(const ScoredSet& s);

struct RocPoint {
    double threshold;  // anomaly-score cutoff: predict anomaly when -score >= threshold
    double fpr;
    double tpr;
};
std::vector<RocPoint> roc_curve(const ScoredSet& s);

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};
std::vector<PrPoint> pr_curve(const ScoredSet& s);

// Shared equal-width bins spanning [min, max] of all scores.
struct Histogram {
    Vector edges;  // bins + 1 entries
    std::vector<long> normal_counts;
    std::vector<long> anomaly_counts;
};
Histogram histogram(const ScoredSet& s, int bins);

}  // namespace ae1svm
