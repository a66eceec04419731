#include <array>

#include "relanno/dataset.hpp"
#include "relanno/hash.hpp"
#include "relanno/prompting.hpp"
#include "relanno/text.hpp"

namespace relanno::dataset {

namespace {

RelationSchema make_schema(std::string pair, std::string group,
                           std::vector<std::pair<std::string, std::string>> label_templates)
{
    RelationSchema s;
    s.pair_type = std::move(pair);
    s.relation_group = std::move(group);
    for (auto& [label, tpl] : label_templates) {
        s.labels.push_back(label);
        s.templates.emplace(label, tpl);
    }
    s.no_relation_label = "no_other";
    return s;
}

constexpr std::array kOrgs = {"Mississippi Power Company", "LecTec", "Unified Payments, LLC", "Zendex",
                              "Four Corners", "Hawaii Gas", "Macquarie Group Limited", "Orbital Tracking Corp.",
                              "Barrier Technology Corporation", "Pinnacle West", "Copper Mountain Solar 3",
                              "Atlas Financial Holdings", "Wishbone Pet Products Inc.", "Midstream Management"};
constexpr std::array kPeople = {"W. Howard Keenan, Jr.", "Harel Gadot", "Michael D. Huddy", "Untermeyer",
                                "Morrison", "Yvonne Alvarez", "Dana Whitfield", "Priya Raman"};
constexpr std::array kDates = {"December 23, 1924", "1977", "April 2013", "July 6, 2016", "March 2011",
                               "July 30, 2009", "February 2014", "September 30, 2017"};
constexpr std::array kPlaces = {"Elk Grove Village", "Culver City", "Utah", "Minnesota", "Alabama", "Nevada",
                                "San Antonio", "Virginia"};
constexpr std::array kMoney = {"$40.8 million", "$250,000", "$148 million", "$66 million", "$23.3 million",
                               "$17.5 million", "$1.2 billion", "$310,000"};
constexpr std::array kTitles = {"Chairman", "Chief Executive Officer", "President", "Director",
                                "Chief Financial Officer", "Treasurer", "Secretary", "General Counsel"};

template <std::size_t N>
std::string pick(SplitMix64& rng, const std::array<const char*, N>& pool)
{
    return pool[rng.below(N)];
}

std::string first_surface(std::string_view pair, SplitMix64& rng)
{
    return pair.substr(0, 3) == "PER" ? pick(rng, kPeople) : pick(rng, kOrgs);
}

std::string second_surface(std::string_view pair, SplitMix64& rng, const std::string& e1)
{
    if (pair.ends_with("DATE"))
        return pick(rng, kDates);
    if (pair.ends_with("GPE"))
        return pick(rng, kPlaces);
    if (pair.ends_with("MONEY"))
        return pick(rng, kMoney);
    if (pair.ends_with("TITLE"))
        return pick(rng, kTitles);
    for (;;) {
        auto s = pick(rng, kOrgs);
        if (s != e1)
            return s;
    }
}

} // namespace

SchemaMap default_schemas()
{
    SchemaMap m;
    auto add = [&](RelationSchema s) { m.emplace(s.pair_type, std::move(s)); };
    const std::pair<std::string, std::string> none = {"no_other", "no/other relation between {E1} and {E2}"};

    add(make_schema("ORG-DATE", "date of formation",
                    {{"formed_on", "{E1} is/was formed on {E2}"}, {"acquired_on", "{E1} is/was acquired on {E2}"}, none}));
    add(make_schema("ORG-GPE", "organization location",
                    {{"headquartered_in", "{E1} is/was headquartered in {E2}"},
                     {"operations_in", "{E1} has/had operations in {E2}"},
                     {"formed_in", "{E1} is/was formed in {E2}"},
                     none}));
    add(make_schema("ORG-ORG", "organization affiliation",
                    {{"subsidiary_of", "{E1} is/was a subsidiary of {E2}"},
                     {"shares_of", "{E1} holds/held shares of {E2}"},
                     {"agreement_with", "{E1} has/had an agreement with {E2}"},
                     none}));
    add(make_schema("ORG-MONEY", "financial figure",
                    {{"profit_of", "{E2} is/was a profit of {E1}"}, {"loss_of", "{E2} is/was a loss of {E1}"}, none}));
    add(make_schema("PER-ORG", "person affiliation",
                    {{"employee_of", "{E1} is/was an employee of {E2}"},
                     {"member_of", "{E1} is/was a member of {E2}"},
                     {"founder_of", "{E1} is/was a founder of {E2}"},
                     none}));
    add(make_schema("PER-TITLE", "job title", {{"title", "{E1} holds/held the title of {E2}"}, none}));
    return m;
}

Dataset synthesize(const SchemaMap& schemas, const SynthOptions& opts)
{
    Dataset d;
    d.schemas = schemas;
    SplitMix64 rng(mix64(opts.seed));

    std::size_t serial = 0;
    for (const auto& [pair, count] : opts.per_pair) {
        const auto& schema = schemas.at(pair);
        for (std::size_t k = 0; k < count; ++k) {
            Instance inst;
            inst.id = "syn-" + std::to_string(serial++);
            inst.pair_type = pair;

            const auto e1 = first_surface(pair, rng);
            const auto e2 = second_surface(pair, rng, e1);
            // Alternate entity order so both marker orders occur.
            const bool e2_first = rng.below(4) == 0;
            const std::string lead = "In its annual report, ";
            const std::string mid = " was discussed alongside ";
            const std::string tail = " in the reporting period.";
            const auto& a = e2_first ? e2 : e1;
            const auto& b = e2_first ? e1 : e2;
            inst.sentence = lead + a + mid + b + tail;

            const auto a_start = text::code_points(lead);
            const auto a_end = a_start + text::code_points(a);
            const auto b_start = a_end + text::code_points(mid);
            const auto b_end = b_start + text::code_points(b);
            EntitySpan sa{a, a_start, a_end};
            EntitySpan sb{b, b_start, b_end};
            inst.e1 = e2_first ? sb : sa;
            inst.e2 = e2_first ? sa : sb;

            const auto& gold = schema.labels[rng.below(schema.labels.size())];
            inst.gold_label = gold;
            for (std::size_t w = 0; w < opts.crowd_workers; ++w) {
                if (rng.uniform() < opts.crowd_accuracy)
                    inst.crowd_labels.push_back(gold);
                else
                    inst.crowd_labels.push_back(schema.labels[rng.below(schema.labels.size())]);
            }
            d.instances.push_back(std::move(inst));
        }
    }
    d.fingerprint = sha256_hex(serialize_dataset(d));
    return d;
}

Dataset synthesize(const SchemaMap& schemas, std::size_t n, std::uint64_t seed)
{
    SynthOptions opts;
    opts.seed = seed;
    std::vector<std::string> pairs;
    for (const auto& [p, _] : schemas)
        pairs.push_back(p);
    for (std::size_t i = 0; i < n; ++i)
        ++opts.per_pair[pairs[i % pairs.size()]];
    return synthesize(schemas, opts);
}

} // namespace relanno::dataset

namespace relanno::prompting {

ExemplarBank synthetic_exemplars(const dataset::SchemaMap& schemas, const ExemplarBank& base)
{
    ExemplarBank bank = base;
    for (const auto& [pair, schema] : schemas) {
        for (auto v : kAllVariants) {
            const auto k = exemplar_count(v);
            if (k == 0 || bank.contains(pair, v))
                continue;
            const bool cot = category(v) == PromptCategory::few_shot_cot;
            std::vector<Exemplar> exemplars;
            for (std::size_t i = 0; i < k; ++i) {
                const auto& label = schema.labels[i % schema.labels.size()];
                const std::string e1 = "Example Entity " + std::to_string(i + 1);
                const std::string e2 = "Example Argument " + std::to_string(i + 1);
                Exemplar ex;
                ex.pair_type = pair;
                ex.marked_sentence = "The filing mentions **" + e1 + "** together with __" + e2 + "__.";
                ex.answer = schema.render_option(label, e1, e2) + ".";
                if (cot)
                    ex.reasoning = "The highlighted phrases " + e1 + " and " + e2 + " are the entities in question, and the answer is the option the sentence supports.";
                exemplars.push_back(std::move(ex));
            }
            bank.add(pair, v, std::move(exemplars));
        }
    }
    return bank;
}

} // namespace relanno::prompting
