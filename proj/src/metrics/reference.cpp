#include "detail.hpp"

namespace relanno::metrics::serial {

double fleiss_kappa(const RatingMatrix& ratings)
{
    detail::FleissSums s;
    s.raters = detail::check_ratings(ratings);
    s.column.assign(ratings.front().size(), 0);
    for (const auto& row : ratings)
        for (std::size_t j = 0; j < row.size(); ++j) {
            s.agree += static_cast<long long>(row[j]) * row[j];
            s.column[j] += row[j];
        }
    return detail::fleiss_from_sums(s, ratings.size());
}

MetricReport evaluate(const LabelVector& predictions, const dataset::Dataset& slice, EvalMode mode)
{
    const auto p = detail::plan(predictions, slice);
    std::vector<detail::Counts> counts(p.pairs.size());
    for (std::size_t i = 0; i < p.pred.size(); ++i)
        counts[p.pair_of[i]] += detail::score_one(*p.pred[i], *p.gold[i], *p.negative[i], mode);
    return detail::finish(p, counts);
}

} // namespace relanno::metrics::serial
