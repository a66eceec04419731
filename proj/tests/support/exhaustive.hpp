#pragma once

// Exhaustive RelIndex enumeration shared by the unit and acceptance suites.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "relanno/aggregation.hpp"
#include "relanno/error.hpp"

namespace exhaustive {

struct Stats {
    std::size_t combos = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

/// Every outcome an annotator can produce against `labels`: each label, a blank, a hallucination
/// whose style is each label, and an unmapped hallucination.
inline std::vector<relanno::parsing::ParsedLabel> alphabet(const std::vector<std::string>& labels)
{
    using relanno::parsing::ParsedLabel;
    std::vector<ParsedLabel> out;
    for (const auto& l : labels)
        out.push_back(ParsedLabel::make_label(l));
    out.push_back(ParsedLabel::make_blank());
    for (const auto& l : labels)
        out.push_back(ParsedLabel::make_hallucination("free text", l));
    out.push_back(ParsedLabel::make_hallucination("free text"));
    return out;
}

inline std::optional<std::string> oracle_effective(const relanno::parsing::ParsedLabel& o)
{
    if (o.is_label())
        return o.label;
    if (o.is_hallucination() && o.style)
        return *o.style;
    return std::nullopt;
}

/// Compares relindex_vote with the brute-force oracle on every outcome tuple of length 1..max_k.
/// With `check_majority`, the identity-matrix agreement with majority_vote is checked as well.
inline void run(const relanno::aggregation::SimilarityMatrix& sim, std::size_t max_k, bool check_majority,
                Stats& stats)
{
    using namespace relanno;
    const auto& labels = sim.labels();
    const auto alpha = alphabet(labels);
    auto fail = [&](const std::string& why) {
        if (stats.failures++ == 0)
            stats.first_failure = why;
    };
    for (std::size_t k = 1; k <= max_k; ++k) {
        std::vector<std::size_t> digits(k, 0);
        for (;;) {
            std::vector<parsing::ParsedLabel> outcomes;
            std::vector<std::optional<std::string>> eff;
            for (auto d : digits) {
                outcomes.push_back(alpha[d]);
                eff.push_back(oracle_effective(alpha[d]));
            }
            ++stats.combos;
            const auto got = aggregation::relindex_vote(outcomes, sim);
            const auto want = oracle::relindex(eff, labels, [&](const std::string& a, const std::string& b) {
                return sim(a, b);
            });
            bool ok = got.selected == want.selected && std::abs(got.rel_index - want.rel_index) <= 1e-12;
            for (const auto& l : labels)
                ok = ok && std::abs(got.confid.at(l) - want.confid.at(l)) <= 1e-12;
            if (!ok)
                fail(sim.pair_type() + ": relindex differs from oracle at K=" + std::to_string(k));
            if (check_majority) {
                std::size_t usable = 0;
                for (const auto& e : eff)
                    usable += e.has_value();
                if (usable == 0) {
                    bool threw = false;
                    try {
                        aggregation::majority_vote(outcomes, labels);
                    } catch (const ValidationError&) {
                        threw = true;
                    }
                    if (!threw || got.rel_index != 0.0)
                        fail("no-usable-vote tuple not rejected by majority_vote");
                } else {
                    const auto mv = aggregation::majority_vote(outcomes, labels);
                    if (mv.label != got.selected ||
                        std::abs(got.rel_index - static_cast<double>(mv.support) / static_cast<double>(k)) > 1e-15)
                        fail("identity relindex disagrees with majority_vote at K=" + std::to_string(k));
                }
            }
            std::size_t pos = 0;
            while (pos < k && ++digits[pos] == alpha.size())
                digits[pos++] = 0;
            if (pos == k)
                break;
        }
    }
}

inline relanno::aggregation::SimilarityMatrix worked_matrix()
{
    relanno::aggregation::SimilarityMatrix m("PER-ORG", {"member_of", "employee_of", "no_other"});
    m.set("member_of", "employee_of", 0.5);
    return m;
}

/// Identity matrices for 1..max_labels labels, a random symmetric matrix per size, and the worked matrix.
inline Stats run_all(std::size_t max_k, std::size_t max_labels)
{
    Stats stats;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t n = 1; n <= max_labels; ++n) {
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i)
            labels.push_back("label_" + std::string(1, static_cast<char>('a' + i)));
        relanno::aggregation::SimilarityMatrix identity("P" + std::to_string(n), labels);
        run(identity, max_k, true, stats);
        auto random = identity;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                random.set(labels[i], labels[j], u(rng));
        run(random, max_k, false, stats);
    }
    run(worked_matrix(), max_k, false, stats);
    return stats;
}

} // namespace exhaustive
