#include "detail.hpp"

namespace relanno::aggregation::serial {

std::vector<VoteResult> relindex_vote_panel(const Panel& panel, const dataset::Dataset& ds, const SimilarityBook& sims)
{
    const auto p = detail::plan(panel, ds, &sims);
    std::vector<VoteResult> out;
    out.reserve(ds.instances.size());
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        const auto& inst = ds.instances[i];
        out.push_back(detail::vote_instance(panel, inst, p.outcomes[i], sims.for_pair(inst.pair_type)));
    }
    return out;
}

metrics::LabelVector majority_vote_panel(const Panel& panel, const dataset::Dataset& ds)
{
    const auto p = detail::plan(panel, ds, nullptr);
    metrics::LabelVector v;
    for (std::size_t i = 0; i < ds.instances.size(); ++i)
        v.push_back(ds.instances[i].id, detail::majority_instance(ds.schema_for(ds.instances[i]), p.outcomes[i]));
    return v;
}

} // namespace relanno::aggregation::serial
