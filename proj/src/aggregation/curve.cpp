#include <algorithm>
#include <cmath>

#include "relanno/aggregation.hpp"
#include "relanno/error.hpp"

namespace relanno::aggregation {

std::vector<const VoteResult*> ranked(const std::vector<VoteResult>& votes)
{
    std::vector<const VoteResult*> out;
    out.reserve(votes.size());
    for (const auto& v : votes)
        out.push_back(&v);
    std::sort(out.begin(), out.end(), [](const VoteResult* a, const VoteResult* b) {
        if (a->rel_index != b->rel_index)
            return a->rel_index > b->rel_index;
        return a->instance_id < b->instance_id;
    });
    return out;
}

std::size_t covered_count(double p, std::size_t n)
{
    // the epsilon keeps 0.65 * 100 at 65 despite binary rounding
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
    return std::min(k, n);
}

std::vector<double> default_steps()
{
    std::vector<double> s;
    for (int i = 1; i <= 20; ++i)
        s.push_back(i / 20.0);
    return s;
}

std::vector<CurvePoint> coverage_curve(const std::vector<VoteResult>& votes, const dataset::Dataset& gold,
                                       const std::vector<double>& steps)
{
    if (votes.empty())
        throw ValidationError("coverage_curve: no votes");
    for (double p : steps)
        if (!(p > 0.0 && p <= 1.0))
            throw ValidationError("coverage_curve: step " + std::to_string(p) + " outside (0,1]");

    const auto order = ranked(votes);
    // correct_prefix[k] = correct selections among the top k
    std::vector<std::size_t> correct_prefix(order.size() + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto* inst = gold.find(order[i]->instance_id);
        if (!inst)
            throw NotFoundError("coverage_curve: instance " + order[i]->instance_id + " not in dataset");
        if (!inst->gold_label)
            throw ValidationError("coverage_curve: instance " + inst->id + " has no gold label");
        correct_prefix[i + 1] = correct_prefix[i] + (order[i]->selected == *inst->gold_label);
    }

    std::vector<CurvePoint> out;
    for (double p : steps) {
        auto k = std::max<std::size_t>(1, covered_count(p, order.size()));
        out.push_back({p, k, static_cast<double>(correct_prefix[k]) / static_cast<double>(k)});
    }
    return out;
}

void TriagePolicy::validate() const
{
    if (kind == Kind::threshold && !(value >= 0.0 && value <= 1.0))
        throw ValidationError("triage threshold must lie in [0,1]");
    if (kind == Kind::coverage && !(value > 0.0 && value <= 1.0))
        throw ValidationError("triage coverage must lie in (0,1]");
}

TriageSplit triage(const std::vector<VoteResult>& votes, const TriagePolicy& policy)
{
    policy.validate();
    const auto order = ranked(votes);
    std::size_t n_auto = 0;
    if (policy.kind == TriagePolicy::Kind::coverage) {
        n_auto = covered_count(policy.value, order.size());
    } else {
        while (n_auto < order.size() && order[n_auto]->rel_index >= policy.value)
            ++n_auto;
    }
    TriageSplit s;
    for (std::size_t i = 0; i < n_auto; ++i)
        s.auto_accepted.push_back(order[i]->instance_id);
    // queue: ascending rel_index, ties by ascending id
    std::vector<const VoteResult*> rest(order.begin() + static_cast<long>(n_auto), order.end());
    std::sort(rest.begin(), rest.end(), [](const VoteResult* a, const VoteResult* b) {
        if (a->rel_index != b->rel_index)
            return a->rel_index < b->rel_index;
        return a->instance_id < b->instance_id;
    });
    for (const auto* v : rest)
        s.expert_queue.push_back(v->instance_id);
    return s;
}

} // namespace relanno::aggregation
