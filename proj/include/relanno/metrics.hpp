#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "relanno/dataset.hpp"
#include "relanno/parsing.hpp"

// Agreement (Cohen, Fleiss), quality (micro-F1, accuracy), run averaging and significance tests.
namespace relanno::metrics {

struct LabelVector {
    std::vector<std::string> ids;
    std::vector<parsing::ParsedLabel> outcomes;

    std::size_t size() const { return outcomes.size(); }
    void push_back(std::string id, parsing::ParsedLabel outcome)
    {
        ids.push_back(std::move(id));
        outcomes.push_back(std::move(outcome));
    }
};

LabelVector label_vector(const std::vector<parsing::AnnotationRecord>& records);

/// Agreement categories (label id, "<blank>", "<hallucination>") in vector order.
std::vector<std::string> categories(const LabelVector& v);

/// Categories are compared positionally; both vectors must share the same id order.
double cohen_kappa(const LabelVector& a, const LabelVector& b);
double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// rows = items, columns = categories, cell = number of raters choosing that category.
using RatingMatrix = std::vector<std::vector<int>>;

double fleiss_kappa(const RatingMatrix& ratings);

/// Builds a rating matrix from rater vectors aligned on ids (every rater must cover the same ids).
RatingMatrix rating_matrix(const std::vector<LabelVector>& raters);

enum class EvalMode { all_classes, exclude_no_relation };

std::string to_string(EvalMode m);
EvalMode parse_eval_mode(const std::string& s);

struct PairScore {
    std::size_t n = 0;
    std::size_t correct = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double micro_f1 = 0.0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct MetricReport {
    std::map<std::string, PairScore> per_pair;
    double micro_f1 = 0.0;   // unweighted mean over pairs
    double accuracy = 0.0;
};

/// Scores predictions against the gold labels of `slice`. Predictions are matched by id, so
/// their order does not matter; every slice instance needs exactly one prediction.
/// Blanks count as FN only, hallucinations as FP and FN.
MetricReport evaluate(const LabelVector& predictions, const dataset::Dataset& slice,
                      EvalMode mode = EvalMode::all_classes);

/// Field-wise mean of reports over identical pair sets.
MetricReport average_runs(const std::vector<MetricReport>& reports);

/// Fraction of hallucinated outcomes among instances whose gold label is `gold_filter`.
double hallucination_rate(const std::vector<parsing::AnnotationRecord>& records, const dataset::Dataset& ds,
                          const std::string& gold_filter);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

/// Two-tailed paired t-test on per-pair metric values.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05);

// Single-threaded versions of the parallel kernels, kept as a baseline for tests and the bench.
namespace serial {
double fleiss_kappa(const RatingMatrix& ratings);
MetricReport evaluate(const LabelVector& predictions, const dataset::Dataset& slice,
                      EvalMode mode = EvalMode::all_classes);
} // namespace serial

} // namespace relanno::metrics
