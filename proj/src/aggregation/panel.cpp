#include <unordered_map>

#include "detail.hpp"
#include "relanno/error.hpp"

namespace relanno::aggregation {

namespace detail {

PanelPlan plan(const Panel& panel, const dataset::Dataset& ds, const SimilarityBook* sims)
{
    if (panel.size() == 0)
        throw ValidationError("panel has no annotators");
    if (panel.votes.size() != panel.annotators.size())
        throw ValidationError("panel annotators and vote vectors differ in count");

    std::vector<std::unordered_map<std::string_view, const parsing::ParsedLabel*>> index(panel.size());
    for (std::size_t k = 0; k < panel.size(); ++k) {
        const auto& v = panel.votes[k];
        for (std::size_t i = 0; i < v.size(); ++i)
            index[k].emplace(v.ids[i], &v.outcomes[i]);
    }

    PanelPlan p;
    p.outcomes.resize(ds.instances.size());
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        const auto& inst = ds.instances[i];
        const auto& schema = ds.schema_for(inst);
        const SimilarityMatrix* sim = sims ? &sims->for_pair(inst.pair_type) : nullptr;
        for (std::size_t k = 0; k < panel.size(); ++k) {
            auto it = index[k].find(inst.id);
            if (it == index[k].end()) {
                if (missing.size() < 10)
                    missing.push_back(panel.annotators[k] + ":" + inst.id);
                continue;
            }
            const auto& o = *it->second;
            if (o.is_label() && !schema.has_label(o.label))
                throw ValidationError("annotator " + panel.annotators[k] + " gave label '" + o.label +
                                      "' outside the schema of " + inst.id);
            if (o.is_label() && sim)
                sim->index(o.label);
            p.outcomes[i].push_back(&o);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing)
            list += (list.empty() ? "" : ", ") + m;
        throw NotFoundError("panel lacks outcomes for: " + list);
    }
    return p;
}

VoteResult vote_instance(const Panel& panel, const dataset::Instance& inst,
                         const std::vector<const parsing::ParsedLabel*>& outcomes, const SimilarityMatrix& sim)
{
    std::vector<parsing::ParsedLabel> flat;
    flat.reserve(outcomes.size());
    for (const auto* o : outcomes)
        flat.push_back(*o);
    auto r = relindex_vote(flat, sim);
    r.instance_id = inst.id;
    r.pair_type = inst.pair_type;
    for (std::size_t k = 0; k < flat.size(); ++k)
        r.assessments.push_back({panel.annotators[k], std::move(flat[k])});
    return r;
}

parsing::ParsedLabel majority_instance(const dataset::RelationSchema& schema,
                                       const std::vector<const parsing::ParsedLabel*>& outcomes)
{
    std::map<std::string, std::size_t> counts;
    for (const auto* o : outcomes)
        if (auto l = effective_label(*o, schema.labels))
            ++counts[*l];
    if (counts.empty())
        return parsing::ParsedLabel::make_blank();
    const std::string* best = nullptr;
    std::size_t support = 0;
    for (const auto& [label, n] : counts)
        if (n > support) {
            best = &label;
            support = n;
        }
    return parsing::ParsedLabel::make_label(*best);
}

} // namespace detail

std::vector<VoteResult> relindex_vote_panel(const Panel& panel, const dataset::Dataset& ds, const SimilarityBook& sims)
{
    const auto p = detail::plan(panel, ds, &sims);
    std::vector<VoteResult> out(ds.instances.size());
    const auto n = static_cast<long long>(ds.instances.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const auto& inst = ds.instances[u];
        out[u] = detail::vote_instance(panel, inst, p.outcomes[u], sims.for_pair(inst.pair_type));
    }
    return out;
}

metrics::LabelVector majority_vote_panel(const Panel& panel, const dataset::Dataset& ds)
{
    const auto p = detail::plan(panel, ds, nullptr);
    std::vector<parsing::ParsedLabel> winners(ds.instances.size());
    const auto n = static_cast<long long>(ds.instances.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        winners[u] = detail::majority_instance(ds.schema_for(ds.instances[u]), p.outcomes[u]);
    }
    metrics::LabelVector v;
    for (std::size_t i = 0; i < winners.size(); ++i)
        v.push_back(ds.instances[i].id, std::move(winners[i]));
    return v;
}

} // namespace relanno::aggregation
