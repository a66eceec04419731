#include <algorithm>
#include <cmath>

#include "relanno/aggregation.hpp"
#include "relanno/error.hpp"

namespace relanno::aggregation {

namespace {
constexpr double kTieEps = 1e-12;
}

std::optional<std::string> effective_label(const parsing::ParsedLabel& outcome, const std::vector<std::string>& labels)
{
    if (outcome.is_label())
        return outcome.label;
    if (outcome.is_hallucination() && outcome.style &&
        std::find(labels.begin(), labels.end(), *outcome.style) != labels.end())
        return outcome.style;
    return std::nullopt;
}

MajorityResult majority_vote(const std::vector<parsing::ParsedLabel>& outcomes, const std::vector<std::string>& labels)
{
    if (outcomes.empty())
        throw ValidationError("majority_vote: no outcomes");
    std::map<std::string, std::size_t> counts;
    for (const auto& o : outcomes)
        if (auto l = effective_label(o, labels))
            ++counts[*l];
    if (counts.empty())
        throw ValidationError("no usable votes");
    // map iterates ids in ascending order, so the first maximum is the smallest id
    MajorityResult best;
    for (const auto& [label, n] : counts)
        if (n > best.support)
            best = {label, n};
    return best;
}

VoteResult relindex_vote(const std::vector<parsing::ParsedLabel>& outcomes, const SimilarityMatrix& sim)
{
    if (outcomes.empty())
        throw ValidationError("relindex_vote: no outcomes");
    const auto& labels = sim.labels();
    std::vector<long> votes_for;
    votes_for.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        if (o.is_label()) {
            votes_for.push_back(static_cast<long>(sim.index(o.label)));
        } else if (auto l = effective_label(o, labels)) {
            votes_for.push_back(static_cast<long>(sim.index(*l)));
        } else {
            votes_for.push_back(-1);
        }
    }

    VoteResult r;
    const double k = static_cast<double>(outcomes.size());
    bool first = true;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        double sum = 0.0;
        for (long i : votes_for)
            if (i >= 0)
                sum += sim.at(static_cast<std::size_t>(i), j);
        const double c = sum / k;
        r.confid.emplace(labels[j], c);
        if (first || c > r.rel_index)
            r.rel_index = c;
        first = false;
    }
    for (const auto& [label, c] : r.confid)   // ascending ids: first near-maximum wins
        if (std::abs(c - r.rel_index) <= kTieEps) {
            r.selected = label;
            break;
        }
    return r;
}

void Panel::add(std::string annotator, metrics::LabelVector v)
{
    annotators.push_back(std::move(annotator));
    votes.push_back(std::move(v));
}

} // namespace relanno::aggregation
