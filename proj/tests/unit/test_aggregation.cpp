#include <doctest.h>

#include <random>

#include "exhaustive.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "relanno/aggregation.hpp"

using namespace relanno;
using namespace relanno::aggregation;
using parsing::ParsedLabel;

namespace {

ParsedLabel L(const std::string& s) { return ParsedLabel::make_label(s); }

VoteResult vote(std::string id, double rel, std::string selected, std::string pair = "ORG-DATE")
{
    VoteResult v;
    v.instance_id = std::move(id);
    v.pair_type = std::move(pair);
    v.rel_index = rel;
    v.selected = std::move(selected);
    return v;
}

/// Dataset of n ORG-DATE instances and votes with random rel_index values from a small grid.
std::pair<dataset::Dataset, std::vector<VoteResult>> random_votes(std::size_t n, std::uint64_t seed)
{
    dataset::SynthOptions o;
    o.per_pair = {{"ORG-DATE", n}};
    o.seed = seed;
    auto ds = dataset::synthesize(dataset::default_schemas(), o);
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::vector<VoteResult> votes;
    const auto& labels = ds.schemas.at("ORG-DATE").labels;
    for (const auto& inst : ds.instances) {
        const double rel = static_cast<double>(1 + rng() % 6) / 6.0;
        const bool right = (rng() % 100) < 40 + 50 * rel;
        votes.push_back(vote(inst.id, rel, right ? *inst.gold_label : labels[(rng() % 2 + 1 +
            (std::find(labels.begin(), labels.end(), *inst.gold_label) - labels.begin())) % 3]));
    }
    return {ds, votes};
}

} // namespace

TEST_SUITE("aggregation") {

TEST_CASE("majority vote")
{
    const std::vector<std::string> labels = {"formed_on", "acquired_on", "no_other"};
    auto r = majority_vote({L("formed_on"), L("formed_on"), L("no_other")}, labels);
    CHECK(r.label == "formed_on");
    CHECK(r.support == 2);
    CHECK(majority_vote({L("no_other"), L("acquired_on")}, labels).label == "acquired_on");
    try {
        majority_vote({ParsedLabel::make_blank(), ParsedLabel::make_blank()}, labels);
        FAIL("expected error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("no usable votes") != std::string::npos);
    }
    // a hallucination whose style is a schema label votes for it
    auto h = majority_vote({ParsedLabel::make_hallucination("was set up on", "formed_on"), L("no_other"),
                            ParsedLabel::make_hallucination("set up", "formed_on")},
                           labels);
    CHECK(h.label == "formed_on");
    CHECK(h.support == 2);
}

TEST_CASE("relindex worked example")
{
    auto sim = exhaustive::worked_matrix();
    auto r = relindex_vote({L("member_of"), L("employee_of"), L("member_of")}, sim);
    CHECK(std::abs(r.confid.at("member_of") - 2.5 / 3) <= 1e-12);
    CHECK(std::abs(r.confid.at("employee_of") - 2.0 / 3) <= 1e-12);
    CHECK(r.confid.at("no_other") == 0.0);
    CHECK(r.selected == "member_of");
    CHECK(std::abs(r.rel_index - 0.8333333333333333) <= 1e-12);

    auto u = relindex_vote({L("no_other"), L("no_other"), L("no_other")}, sim);
    CHECK(u.rel_index == 1.0);
    CHECK(u.selected == "no_other");

    CHECK_THROWS_AS(relindex_vote({L("founder_of")}, sim), ValidationError);
    CHECK_THROWS_AS(relindex_vote({}, sim), ValidationError);
}

TEST_CASE("relindex matches the brute-force oracle")
{
    auto stats = exhaustive::run_all(3, 3);
    CHECK(stats.failures == 0);
    CHECK(stats.first_failure == "");
    CHECK(stats.combos > 1000);
}

TEST_CASE("scaling the matrix keeps the selection")
{
    SimilarityMatrix m("ORG-ORG", {"subsidiary_of", "shares_of", "agreement_with", "no_other"});
    m.set("subsidiary_of", "shares_of", 0.4);
    m.set("agreement_with", "shares_of", 0.2);
    auto half = m.scaled(0.5);
    std::mt19937 rng(3);
    const auto alpha = exhaustive::alphabet(m.labels());
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<ParsedLabel> outs;
        for (int k = 0; k < 5; ++k)
            outs.push_back(alpha[rng() % alpha.size()]);
        auto a = relindex_vote(outs, m);
        auto b = relindex_vote(outs, half);
        CHECK(a.selected == b.selected);
        CHECK(std::abs(b.rel_index - 0.5 * a.rel_index) <= 1e-12);
    }
}

TEST_CASE("similarity book")
{
    auto schemas = dataset::default_schemas();
    auto book = SimilarityBook::load(fixtures::data_dir() / "similarity_example.json", schemas);
    const auto& m = book.for_pair("PER-ORG");
    CHECK(m("member_of", "employee_of") == 0.5);
    CHECK(m("employee_of", "member_of") == 0.5);
    CHECK(m("founder_of", "employee_of") == 0.3);
    CHECK(m("no_other", "no_other") == 1.0);
    CHECK(book.for_pair("ORG-DATE")("formed_on", "acquired_on") == 0.0);
    m.validate();

    CHECK_THROWS_AS(SimilarityBook::parse(R"({"PER-ORG":{"member_of":{"employee_of":0.5},"employee_of":{"member_of":0.4}}})",
                                          schemas),
                    ValidationError);
    CHECK_THROWS_AS(SimilarityBook::parse(R"({"PER-ORG":{"member_of":{"ceo_of":0.5}}})", schemas), ValidationError);
    CHECK_THROWS_AS(SimilarityBook::parse(R"({"PER-ORG":{"member_of":{"employee_of":1.5}}})", schemas),
                    ValidationError);
}

TEST_CASE("panels: parallel equals serial and missing outcomes are listed")
{
    auto ds = dataset::synthesize(dataset::default_schemas(), 5000, 31);
    auto sims = SimilarityBook::load(fixtures::data_dir() / "similarity_example.json", ds.schemas);
    std::mt19937 rng(5);
    Panel panel;
    for (int k = 0; k < 7; ++k) {
        metrics::LabelVector v;
        for (const auto& inst : ds.instances) {
            const auto alpha = exhaustive::alphabet(ds.schema_for(inst).labels);
            v.push_back(inst.id, alpha[rng() % alpha.size()]);
        }
        panel.add("a" + std::to_string(k), v);
    }
    auto par = relindex_vote_panel(panel, ds, sims);
    auto ser = serial::relindex_vote_panel(panel, ds, sims);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].instance_id == ds.instances[i].id);
        CHECK(par[i].selected == ser[i].selected);
        CHECK(par[i].rel_index == ser[i].rel_index);
        CHECK(par[i].confid == ser[i].confid);
        CHECK(par[i].assessments.size() == 7);
    }
    auto mp = majority_vote_panel(panel, ds);
    auto ms = serial::majority_vote_panel(panel, ds);
    CHECK(mp.ids == ms.ids);
    CHECK(mp.outcomes == ms.outcomes);

    auto broken = panel;
    broken.votes[2].ids.pop_back();
    broken.votes[2].outcomes.pop_back();
    try {
        relindex_vote_panel(broken, ds, sims);
        FAIL("expected error");
    } catch (const NotFoundError& e) {
        CHECK(std::string(e.what()).find(ds.instances.back().id) != std::string::npos);
    }
}

TEST_CASE("ensemble majority matches a recount")
{
    auto ds = dataset::synthesize(dataset::default_schemas(), 600, 8);
    std::mt19937 rng(12);
    Panel panel;
    for (const char* who : {"gpt4", "palm2", "mpt"}) {
        metrics::LabelVector v;
        for (const auto& inst : ds.instances) {
            const auto& labels = ds.schema_for(inst).labels;
            const auto r = rng() % 10;
            v.push_back(inst.id, r == 0 ? ParsedLabel::make_blank()
                                        : (r == 1 ? ParsedLabel::make_hallucination("x") : L(labels[rng() % labels.size()])));
        }
        panel.add(who, v);
    }
    auto got = majority_vote_panel(panel, ds);
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        std::map<std::string, int> count;
        for (const auto& v : panel.votes)
            if (v.outcomes[i].is_label())
                ++count[v.outcomes[i].label];
        if (count.empty()) {
            CHECK(got.outcomes[i].is_blank());
            continue;
        }
        std::string best;
        int top = 0;
        for (auto& [l, c] : count)
            if (c > top) {
                best = l;
                top = c;
            }
        CHECK(got.outcomes[i] == L(best));
    }
}

TEST_CASE("coverage curve")
{
    auto [ds, votes] = random_votes(10, 4);
    const std::vector<double> steps = {0.1, 0.2, 0.25, 0.3, 0.5, 0.55, 0.7, 0.9, 1.0};
    auto curve = coverage_curve(votes, ds, steps);
    std::vector<oracle::Scored> scored;
    std::size_t correct = 0;
    for (const auto& v : votes) {
        const bool ok = v.selected == *ds.find(v.instance_id)->gold_label;
        correct += ok;
        scored.push_back({v.instance_id, v.rel_index, ok});
    }
    REQUIRE(curve.size() == steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        auto [k, acc] = oracle::prefix_accuracy(scored, steps[i]);
        CHECK(curve[i].coverage == steps[i]);
        CHECK(curve[i].count == k);
        CHECK(curve[i].accuracy == acc);
    }
    CHECK(curve.back().accuracy == static_cast<double>(correct) / 10.0);

    std::vector<VoteResult> perfect;
    for (const auto& inst : ds.instances)
        perfect.push_back(vote(inst.id, 1.0, *inst.gold_label));
    for (const auto& p : coverage_curve(perfect, ds, default_steps()))
        CHECK(p.accuracy == 1.0);

    CHECK_THROWS_AS(coverage_curve({}, ds, steps), ValidationError);
    CHECK(default_steps().size() == 20);
    CHECK(default_steps().back() == 1.0);
    CHECK(covered_count(0.35, 20) == 7);
    CHECK(covered_count(0.65, 100) == 65);
}

TEST_CASE("triage")
{
    auto [ds, votes] = random_votes(100, 9);
    auto split = triage(votes, TriagePolicy::coverage(0.65));
    CHECK(split.auto_accepted.size() == 65);
    CHECK(split.expert_queue.size() == 35);
    std::map<std::string, double> rel;
    for (const auto& v : votes)
        rel[v.instance_id] = v.rel_index;
    for (std::size_t i = 1; i < split.expert_queue.size(); ++i) {
        const auto& a = split.expert_queue[i - 1];
        const auto& b = split.expert_queue[i];
        CHECK((rel[a] < rel[b] || (rel[a] == rel[b] && a < b)));
    }
    CHECK(rel[split.auto_accepted.back()] >= rel[split.expert_queue.front()]);

    CHECK(triage(votes, TriagePolicy::threshold(0)).expert_queue.empty());
    auto strict = triage(votes, TriagePolicy::threshold(1));
    for (const auto& id : strict.expert_queue)
        CHECK(rel[id] < 1.0);
    for (const auto& id : strict.auto_accepted)
        CHECK(rel[id] == 1.0);
    CHECK_THROWS_AS(TriagePolicy::coverage(0).validate(), ValidationError);
    CHECK_THROWS_AS(TriagePolicy::threshold(1.5).validate(), ValidationError);
}

}
