// Parallel kernels vs their serial references on synthetic inputs.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "relanno/aggregation.hpp"
#include "relanno/metrics.hpp"

using namespace relanno;

namespace {

double best_of(int repeats, const std::function<void()>& fn)
{
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial, double parallel, bool same)
{
    std::printf("%-22s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
                same ? "identical" : "MISMATCH");
}

parsing::ParsedLabel random_outcome(const std::vector<std::string>& labels, std::mt19937_64& rng)
{
    const auto roll = rng() % 100;
    if (roll < 5)
        return parsing::ParsedLabel::make_blank();
    if (roll < 12)
        return parsing::ParsedLabel::make_hallucination("free text");
    return parsing::ParsedLabel::make_label(labels[rng() % labels.size()]);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"relanno kernel benchmark"};
    std::size_t n = 200000;
    std::size_t annotators = 12;
    int repeats = 3;
    app.add_option("--instances", n, "instances per kernel")->capture_default_str();
    app.add_option("--annotators", annotators, "panel size")->capture_default_str();
    app.add_option("--repeats", repeats, "best-of repetitions")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const auto ds = dataset::synthesize(dataset::default_schemas(), n, 1);
    const auto sims = aggregation::SimilarityBook::identity(ds.schemas);
    std::mt19937_64 rng(7);

    aggregation::Panel panel;
    for (std::size_t k = 0; k < annotators; ++k) {
        metrics::LabelVector v;
        for (const auto& inst : ds.instances)
            v.push_back(inst.id, random_outcome(ds.schema_for(inst).labels, rng));
        panel.add("a" + std::to_string(k), v);
    }

    metrics::RatingMatrix ratings(n, std::vector<int>(6, 0));
    for (auto& r : ratings)
        for (std::size_t k = 0; k < annotators; ++k)
            ++r[rng() % 6];

    std::printf("instances %zu, annotators %zu, threads %d, best of %d\n", n, annotators, omp_get_max_threads(),
                repeats);
    std::printf("%-22s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

    {
        std::vector<aggregation::VoteResult> a, b;
        const double s = best_of(repeats, [&] { a = aggregation::serial::relindex_vote_panel(panel, ds, sims); });
        const double p = best_of(repeats, [&] { b = aggregation::relindex_vote_panel(panel, ds, sims); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i)
            same = a[i].selected == b[i].selected && a[i].rel_index == b[i].rel_index;
        row("relindex panel vote", s, p, same);
    }
    {
        metrics::LabelVector a, b;
        const double s = best_of(repeats, [&] { a = aggregation::serial::majority_vote_panel(panel, ds); });
        const double p = best_of(repeats, [&] { b = aggregation::majority_vote_panel(panel, ds); });
        row("majority panel vote", s, p, a.outcomes == b.outcomes);
    }
    {
        double a = 0, b = 0;
        const double s = best_of(repeats, [&] { a = metrics::serial::fleiss_kappa(ratings); });
        const double p = best_of(repeats, [&] { b = metrics::fleiss_kappa(ratings); });
        row("fleiss kappa", s, p, a == b);
    }
    {
        metrics::MetricReport a, b;
        const auto& preds = panel.votes.front();
        const double s = best_of(repeats, [&] { a = metrics::serial::evaluate(preds, ds); });
        const double p = best_of(repeats, [&] { b = metrics::evaluate(preds, ds); });
        row("evaluate", s, p, a.micro_f1 == b.micro_f1 && a.accuracy == b.accuracy);
    }
    return 0;
}
