#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "relanno/parsing.hpp"

using namespace relanno;
using namespace relanno::parsing;

namespace {

OptionSet fig2_options()
{
    auto ds = fixtures::fig1();
    const auto& inst = ds.instances[0];
    auto p = prompting::render_prompt(inst, ds.schema_for(inst), prompting::PromptVariant::full_instruction, {},
                                      ds.schema_for(inst).labels, 0);
    return OptionSet::from(p);
}

} // namespace

TEST_SUITE("parsing") {

TEST_CASE("option number")
{
    CHECK(parse_response("2", fig2_options()) == ParsedLabel::make_label("acquired_on"));
    CHECK(parse_response("Answer: 3.", fig2_options()) == ParsedLabel::make_label("no_other"));
    CHECK(parse_response("(1)", fig2_options()) == ParsedLabel::make_label("formed_on"));
    CHECK(parse_response("Option 2: the acquisition", fig2_options()) == ParsedLabel::make_label("acquired_on"));
    CHECK(parse_response("7", fig2_options()).is_hallucination());
}

TEST_CASE("option text")
{
    CHECK(parse_response("Mississippi Power Company is/was formed on December 23, 1924", fig2_options()) ==
          ParsedLabel::make_label("formed_on"));
    CHECK(parse_response("  \"mississippi power company IS/WAS formed on december 23, 1924.\" ", fig2_options()) ==
          ParsedLabel::make_label("formed_on"));
    CHECK(parse_response("no_other", fig2_options()) == ParsedLabel::make_label("no_other"));
    CHECK(parse_response("acquired on", fig2_options()) == ParsedLabel::make_label("acquired_on"));
}

TEST_CASE("blank")
{
    CHECK(parse_response("", fig2_options()).is_blank());
    CHECK(parse_response(" \n\t ", fig2_options()).is_blank());
}

TEST_CASE("free text becomes a hallucination")
{
    auto schemas = dataset::default_schemas();
    const auto& s = schemas.at("ORG-ORG");
    OptionSet o;
    o.e1 = "Hawaii Gas";
    o.e2 = "Macquarie Group Limited";
    o.order = {"no_other", "subsidiary_of", "shares_of"};
    for (const auto& l : o.order)
        o.texts.push_back(s.render_option(l, o.e1, o.e2));
    auto r = parse_response("Hawaii Gas has an agreement with Macquarie Group Limited", o);
    REQUIRE(r.is_hallucination());
    CHECK(r.text == "agreement with");
    CHECK(r.style == std::optional<std::string>("agreement_with"));
    CHECK(r.category() == std::string(kHallucinationCategory));
}

TEST_CASE("every label and permutation round-trips")
{
    auto schemas = dataset::default_schemas();
    std::mt19937 rng(3);
    for (const auto& [pair, schema] : schemas) {
        auto order = schema.labels;
        std::sort(order.begin(), order.end());
        do {
            OptionSet o{order, {}, "Acme Holdings", "Beta Partners"};
            for (const auto& l : order)
                o.texts.push_back(schema.render_option(l, o.e1, o.e2));
            for (std::size_t i = 0; i < order.size(); ++i) {
                const auto want = ParsedLabel::make_label(order[i]);
                const auto num = std::to_string(i + 1);
                CHECK(parse_response(num, o) == want);
                CHECK(parse_response(o.texts[i], o) == want);
                CHECK(parse_response(order[i], o) == want);
                // decorated variants
                const std::vector<std::string> decorated = {
                    "Answer: " + num, num + ".", "(" + num + ")", "Option " + num + ": " + o.texts[i],
                    num + ". " + o.texts[i], "\"" + o.texts[i] + "\"", o.texts[i] + ".", "  " + o.texts[i] + "\n"};
                for (const auto& d : decorated)
                    CHECK(parse_response(d, o) == want);
                std::string upper = o.texts[i];
                for (auto& c : upper)
                    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                CHECK(parse_response(upper, o) == want);
            }
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST_CASE("lexicon")
{
    auto lex = StyleLexicon::defaults();
    CHECK(canonicalize_hallucination("entered into licensing agreements with") ==
          std::optional<std::string>("agreement_with"));
    CHECK(canonicalize_hallucination("xyzzy") == std::nullopt);
    CHECK(canonicalize_hallucination("is a wholly owned subsidiary of") == std::optional<std::string>("subsidiary_of"));
    for (const auto& [style, patterns] : lex.entries()) {
        CHECK(lex.match(style) == std::optional<std::string>(style));
        for (const auto& p : patterns)
            CHECK(lex.match(p) == std::optional<std::string>(style));
    }
    auto file = StyleLexicon::load(fixtures::data_dir() / "lexicon.json");
    for (const auto& [style, patterns] : lex.entries())
        for (const auto& p : patterns)
            CHECK(file.match(p) == lex.match(p));
}

TEST_CASE("categories")
{
    CHECK(ParsedLabel::make_label("x").category() == "x");
    CHECK(ParsedLabel::make_blank().category() == std::string(kBlankCategory));
}

}
