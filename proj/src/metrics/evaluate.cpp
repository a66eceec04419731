#include <algorithm>
#include <unordered_map>

#include <omp.h>

#include "detail.hpp"
#include "relanno/error.hpp"

namespace relanno::metrics {

std::string to_string(EvalMode m)
{
    return m == EvalMode::all_classes ? "all_classes" : "exclude_no_relation";
}

EvalMode parse_eval_mode(const std::string& s)
{
    if (s == "all_classes")
        return EvalMode::all_classes;
    if (s == "exclude_no_relation")
        return EvalMode::exclude_no_relation;
    throw ValidationError("unknown evaluation mode: " + s);
}

namespace detail {

EvalPlan plan(const LabelVector& predictions, const dataset::Dataset& slice)
{
    if (predictions.ids.size() != predictions.outcomes.size())
        throw ValidationError("evaluate: prediction ids and outcomes differ in length");
    std::unordered_map<std::string_view, std::size_t> pos;
    pos.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (!pos.emplace(predictions.ids[i], i).second)
            throw ValidationError("evaluate: duplicate prediction for " + predictions.ids[i]);

    EvalPlan p;
    for (const auto& inst : slice.instances)
        p.pairs.push_back(inst.pair_type);
    std::sort(p.pairs.begin(), p.pairs.end());
    p.pairs.erase(std::unique(p.pairs.begin(), p.pairs.end()), p.pairs.end());

    std::vector<std::string> missing;
    for (const auto& inst : slice.instances) {
        if (!inst.gold_label)
            throw ValidationError("evaluate: instance " + inst.id + " has no gold label");
        auto it = pos.find(inst.id);
        if (it == pos.end()) {
            missing.push_back(inst.id);
            continue;
        }
        p.pair_of.push_back(static_cast<std::size_t>(
            std::lower_bound(p.pairs.begin(), p.pairs.end(), inst.pair_type) - p.pairs.begin()));
        p.pred.push_back(&predictions.outcomes[it->second]);
        p.gold.push_back(&*inst.gold_label);
        p.negative.push_back(&slice.schema_for(inst).no_relation_label);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i)
            list += (i ? ", " : "") + missing[i];
        throw NotFoundError("evaluate: no prediction for " + std::to_string(missing.size()) + " instance(s): " + list +
                            (missing.size() > 10 ? ", ..." : ""));
    }
    if (predictions.size() != slice.instances.size())
        throw ValidationError("evaluate: " + std::to_string(predictions.size() - slice.instances.size()) +
                              " prediction(s) for instances outside the slice");
    return p;
}

Counts score_one(const parsing::ParsedLabel& pred, const std::string& gold, const std::string& negative, EvalMode mode)
{
    const bool drop_neg = mode == EvalMode::exclude_no_relation;
    const bool gold_counts = !(drop_neg && gold == negative);
    Counts c;
    c.n = 1;
    if (pred.is_label()) {
        const bool pred_counts = !(drop_neg && pred.label == negative);
        if (pred.label == gold) {
            c.correct = 1;
            c.tp = gold_counts;
        } else {
            c.fp = pred_counts;
            c.fn = gold_counts;
        }
    } else if (pred.is_blank()) {
        c.fn = gold_counts;
    } else {
        c.fp = 1;
        c.fn = gold_counts;
    }
    return c;
}

MetricReport finish(const EvalPlan& plan, const std::vector<Counts>& counts)
{
    MetricReport r;
    for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
        const auto& c = counts[k];
        PairScore s;
        s.n = c.n;
        s.correct = c.correct;
        s.tp = c.tp;
        s.fp = c.fp;
        s.fn = c.fn;
        s.accuracy = c.n ? static_cast<double>(c.correct) / c.n : 0.0;
        // 2TP/(2TP+FP+FN) rather than 2PR/(P+R): identical value, and exactly equal to
        // accuracy when FP == FN == errors
        const auto denom = 2 * c.tp + c.fp + c.fn;
        s.micro_f1 = denom ? static_cast<double>(2 * c.tp) / denom : 1.0;
        s.precision = (c.tp + c.fp) ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
        s.recall = (c.tp + c.fn) ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
        r.micro_f1 += s.micro_f1;
        r.accuracy += s.accuracy;
        r.per_pair.emplace(plan.pairs[k], s);
    }
    if (!plan.pairs.empty()) {
        r.micro_f1 /= static_cast<double>(plan.pairs.size());
        r.accuracy /= static_cast<double>(plan.pairs.size());
    }
    return r;
}

} // namespace detail

MetricReport evaluate(const LabelVector& predictions, const dataset::Dataset& slice, EvalMode mode)
{
    const auto p = detail::plan(predictions, slice);
    const auto npairs = p.pairs.size();
    const auto n = static_cast<long long>(p.pred.size());
    std::vector<detail::Counts> total(npairs);

#pragma omp parallel
    {
        std::vector<detail::Counts> local(npairs);
#pragma omp for schedule(static) nowait
        for (long long i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            local[p.pair_of[u]] += detail::score_one(*p.pred[u], *p.gold[u], *p.negative[u], mode);
        }
#pragma omp critical(relanno_evaluate)
        for (std::size_t k = 0; k < npairs; ++k)
            total[k] += local[k];
    }
    return detail::finish(p, total);
}

MetricReport average_runs(const std::vector<MetricReport>& reports)
{
    if (reports.empty())
        throw ValidationError("average_runs: no reports");
    MetricReport out;
    for (const auto& [pair, s] : reports.front().per_pair) {
        PairScore a;
        for (const auto& r : reports) {
            auto it = r.per_pair.find(pair);
            if (it == r.per_pair.end() || r.per_pair.size() != reports.front().per_pair.size())
                throw ValidationError("average_runs: reports cover different entity pairs");
            a.micro_f1 += it->second.micro_f1;
            a.accuracy += it->second.accuracy;
            a.precision += it->second.precision;
            a.recall += it->second.recall;
            // counts are pooled over runs
            a.n += it->second.n;
            a.correct += it->second.correct;
            a.tp += it->second.tp;
            a.fp += it->second.fp;
            a.fn += it->second.fn;
        }
        const double k = static_cast<double>(reports.size());
        a.micro_f1 /= k;
        a.accuracy /= k;
        a.precision /= k;
        a.recall /= k;
        out.per_pair.emplace(pair, a);
    }
    for (const auto& r : reports) {
        if (r.per_pair.size() != out.per_pair.size())
            throw ValidationError("average_runs: reports cover different entity pairs");
        out.micro_f1 += r.micro_f1;
        out.accuracy += r.accuracy;
    }
    out.micro_f1 /= static_cast<double>(reports.size());
    out.accuracy /= static_cast<double>(reports.size());
    return out;
}

double hallucination_rate(const std::vector<parsing::AnnotationRecord>& records, const dataset::Dataset& ds,
                          const std::string& gold_filter)
{
    std::size_t total = 0, halluc = 0;
    for (const auto& r : records) {
        const auto* inst = ds.find(r.instance_id);
        if (!inst)
            throw NotFoundError("hallucination_rate: unknown instance " + r.instance_id);
        if (!inst->gold_label)
            throw ValidationError("hallucination_rate: instance " + r.instance_id + " has no gold label");
        if (*inst->gold_label != gold_filter)
            continue;
        ++total;
        halluc += r.parsed.is_hallucination();
    }
    if (total == 0)
        throw ValidationError("hallucination_rate: no records with gold label " + gold_filter);
    return static_cast<double>(halluc) / static_cast<double>(total);
}

} // namespace relanno::metrics
