#pragma once

#include <vector>

#include "relanno/aggregation.hpp"

namespace relanno::aggregation::detail {

/// outcomes[i][k] = annotator k's outcome for dataset instance i, checked so voting cannot throw.
struct PanelPlan {
    std::vector<std::vector<const parsing::ParsedLabel*>> outcomes;
};

PanelPlan plan(const Panel& panel, const dataset::Dataset& ds, const SimilarityBook* sims);

VoteResult vote_instance(const Panel& panel, const dataset::Instance& inst,
                         const std::vector<const parsing::ParsedLabel*>& outcomes, const SimilarityMatrix& sim);
parsing::ParsedLabel majority_instance(const dataset::RelationSchema& schema,
                                       const std::vector<const parsing::ParsedLabel*>& outcomes);

} // namespace relanno::aggregation::detail
