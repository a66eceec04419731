#pragma once

#include <string>
#include <vector>

#include "relanno/metrics.hpp"

namespace relanno::metrics::detail {

struct Counts {
    std::size_t n = 0, correct = 0, tp = 0, fp = 0, fn = 0;

    Counts& operator+=(const Counts& o)
    {
        n += o.n;
        correct += o.correct;
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

/// Everything evaluate needs, resolved up front so the counting loop cannot throw.
struct EvalPlan {
    std::vector<std::string> pairs;                   // sorted pair types
    std::vector<std::size_t> pair_of;                 // per slice instance
    std::vector<const parsing::ParsedLabel*> pred;    // per slice instance
    std::vector<const std::string*> gold;
    std::vector<const std::string*> negative;         // no_relation label of the instance's schema
};

EvalPlan plan(const LabelVector& predictions, const dataset::Dataset& slice);
Counts score_one(const parsing::ParsedLabel& pred, const std::string& gold, const std::string& negative,
                 EvalMode mode);
MetricReport finish(const EvalPlan& plan, const std::vector<Counts>& counts);

struct FleissSums {
    std::size_t raters = 0;
    long long agree = 0;                 // Σ_i Σ_j n_ij²
    std::vector<long long> column;       // Σ_i n_ij
};

/// Validates shape and returns the rater count.
std::size_t check_ratings(const RatingMatrix& ratings);
double fleiss_from_sums(const FleissSums& s, std::size_t items);

} // namespace relanno::metrics::detail
