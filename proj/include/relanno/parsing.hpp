#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relanno/prompting.hpp"

// Raw model text -> canonical label, blank, or hallucination.
namespace relanno::parsing {

struct ParsedLabel {
    enum class Kind { label, blank, hallucination };

    Kind kind = Kind::blank;
    std::string label;                 // canonical id when kind == label
    std::string text;                  // normalized relation phrase when kind == hallucination
    std::optional<std::string> style;  // lexicon style the hallucination maps to, if any

    static ParsedLabel make_label(std::string id) { return {Kind::label, std::move(id), {}, {}}; }
    static ParsedLabel make_blank() { return {}; }
    static ParsedLabel make_hallucination(std::string text, std::optional<std::string> style = std::nullopt)
    {
        return {Kind::hallucination, {}, std::move(text), std::move(style)};
    }

    bool is_label() const { return kind == Kind::label; }
    bool is_blank() const { return kind == Kind::blank; }
    bool is_hallucination() const { return kind == Kind::hallucination; }

    /// Agreement category: the label id, or one shared bucket each for blanks and hallucinations.
    std::string category() const;

    bool operator==(const ParsedLabel&) const = default;
};

inline constexpr std::string_view kBlankCategory = "<blank>";
inline constexpr std::string_view kHallucinationCategory = "<hallucination>";

/// Style -> phrase patterns. Patterns match on whole-word boundaries of normalized text;
/// the longest matching pattern wins, ties go to the earlier style.
class StyleLexicon {
public:
    /// agreement_with, shares_of, member_of, subsidiary_of.
    static StyleLexicon defaults();
    static StyleLexicon parse(std::string_view json_text);
    static StyleLexicon load(const std::filesystem::path& path);

    void add(std::string style, std::vector<std::string> patterns);
    std::optional<std::string> match(std::string_view text) const;
    const std::vector<std::pair<std::string, std::vector<std::string>>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::vector<std::string>>> entries_;
};

/// What a response is parsed against: the options exactly as displayed in the prompt.
struct OptionSet {
    std::vector<std::string> order;   // option i+1 -> canonical label
    std::vector<std::string> texts;   // rendered option text
    std::string e1;
    std::string e2;

    static OptionSet from(const prompting::RenderedPrompt& p) { return {p.option_order, p.option_texts, p.e1, p.e2}; }
};

/// Resolution cascade:
///   1. empty or whitespace -> blank
///   2. leading or quoted option number in range -> that option
///   3. normalized match of an option's text or canonical id -> that option
///   4. otherwise hallucination with the relation phrase left after removing entity surfaces
ParsedLabel parse_response(std::string_view raw, const OptionSet& options,
                           const StyleLexicon& lexicon = StyleLexicon::defaults());

std::optional<std::string> canonicalize_hallucination(std::string_view text,
                                                      const StyleLexicon& lexicon = StyleLexicon::defaults());

struct AnnotationRecord {
    std::string instance_id;
    std::string backend;
    prompting::PromptVariant variant = prompting::PromptVariant::simple;
    double temperature = 0.0;
    int run_index = 1;
    std::string raw;
    ParsedLabel parsed;
    std::vector<std::string> option_order;
};

} // namespace relanno::parsing
