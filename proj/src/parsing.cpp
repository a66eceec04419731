#include "relanno/parsing.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relanno/error.hpp"
#include "relanno/text.hpp"

namespace relanno::parsing {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || (c & 0x80); }

/// Whole-word occurrence of `needle` in `hay`.
bool contains_word(std::string_view hay, std::string_view needle)
{
    if (needle.empty())
        return false;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
        const auto end = pos + needle.size();
        const bool right_ok = end == hay.size() || !is_word_char(hay[end]);
        if (left_ok && right_ok)
            return true;
    }
    return false;
}

std::string underscores_to_spaces(std::string s)
{
    for (auto& c : s)
        if (c == '_')
            c = ' ';
    return s;
}

/// Option number at the start of a normalized answer ("2", "2.", "(2)", "option 2: ...").
std::optional<std::size_t> leading_option_number(std::string_view s)
{
    if (s.substr(0, 6) == "option") {
        s.remove_prefix(6);
        s = text::trim(s);
    }
    if (!s.empty() && (s.front() == '(' || s.front() == '['))
        s.remove_prefix(1);

    std::size_t digits = 0;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits])))
        ++digits;
    if (digits == 0 || digits > 4)
        return std::nullopt;
    const auto number = std::stoul(std::string(s.substr(0, digits)));
    s.remove_prefix(digits);

    int separators = 0;
    if (!s.empty() && (s.front() == ')' || s.front() == ']')) {
        s.remove_prefix(1);
        ++separators;
    }
    if (!s.empty() && (s.front() == '.' || s.front() == ':' || s.front() == ')')) {
        s.remove_prefix(1);
        ++separators;
    }
    if (s.empty() || (separators > 0 && s.front() == ' '))
        return number;
    return std::nullopt;
}

constexpr std::string_view kFillers[] = {"has/had", "is/was", "has", "have", "had", "is",  "was",
                                         "are",     "were",   "been", "an",  "a",   "the", "-"};

std::string relation_phrase(const std::string& normalized, const OptionSet& options)
{
    std::string h = normalized;
    for (const auto& surface : {options.e1, options.e2}) {
        const auto ns = text::normalize(surface);
        if (!ns.empty())
            h = text::replace_all(h, ns, " ");
    }
    h = text::collapse_whitespace(h);
    std::string_view v = h;
    for (bool changed = true; changed;) {
        changed = false;
        v = text::trim(v);
        // dangling comma or possessive left behind by a removed surface
        for (std::string_view junk : {",", "'s ", "’s "}) {
            if (v.substr(0, junk.size()) == junk) {
                v.remove_prefix(junk.size());
                changed = true;
            }
        }
        for (auto f : kFillers) {
            if (v.substr(0, f.size()) == f && (v.size() == f.size() || v[f.size()] == ' ')) {
                v.remove_prefix(f.size());
                changed = true;
                break;
            }
        }
    }
    while (!v.empty() && (v.back() == ',' || v.back() == ' '))
        v.remove_suffix(1);
    return v.empty() ? normalized : std::string(v);
}

} // namespace

std::string ParsedLabel::category() const
{
    switch (kind) {
    case Kind::label: return label;
    case Kind::blank: return std::string(kBlankCategory);
    case Kind::hallucination: return std::string(kHallucinationCategory);
    }
    return {};
}

StyleLexicon StyleLexicon::defaults()
{
    StyleLexicon lex;
    lex.add("agreement_with", {"agreements with", "agreement", "agreements", "licensing agreement", "contract with",
                               "partnership with", "partnered with"});
    lex.add("shares_of", {"share of", "stake in", "equity interest in", "stock of", "shareholder of", "holds shares"});
    lex.add("member_of", {"board of directors", "serves on the board", "director of", "board member"});
    lex.add("subsidiary_of", {"subsidiaries of", "wholly owned subsidiary", "owned by", "division of", "unit of",
                              "parent company"});
    return lex;
}

void StyleLexicon::add(std::string style, std::vector<std::string> patterns)
{
    std::vector<std::string> normalized;
    normalized.push_back(text::normalize(underscores_to_spaces(style)));
    for (const auto& p : patterns)
        normalized.push_back(text::normalize(p));
    entries_.emplace_back(std::move(style), std::move(normalized));
}

StyleLexicon StyleLexicon::parse(std::string_view json_text)
{
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ValidationError(std::string("lexicon file: ") + e.what());
    }
    StyleLexicon lex;
    for (auto& [style, patterns] : doc.items())
        lex.add(style, patterns.get<std::vector<std::string>>());
    return lex;
}

StyleLexicon StyleLexicon::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> StyleLexicon::match(std::string_view raw) const
{
    const auto t = underscores_to_spaces(text::normalize(raw));
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [style, patterns] : entries_)
        for (const auto& p : patterns)
            if (p.size() > best_len && contains_word(t, p)) {
                best = &style;
                best_len = p.size();
            }
    if (!best)
        return std::nullopt;
    return *best;
}

std::optional<std::string> canonicalize_hallucination(std::string_view text, const StyleLexicon& lexicon)
{
    return lexicon.match(text);
}

ParsedLabel parse_response(std::string_view raw, const OptionSet& options, const StyleLexicon& lexicon)
{
    if (text::is_blank(raw))
        return ParsedLabel::make_blank();

    const auto n = text::normalize(raw);

    if (auto num = leading_option_number(n); num && *num >= 1 && *num <= options.order.size())
        return ParsedLabel::make_label(options.order[*num - 1]);

    for (std::size_t i = 0; i < options.order.size(); ++i) {
        const auto& id = options.order[i];
        if (i < options.texts.size() && n == text::normalize(options.texts[i]))
            return ParsedLabel::make_label(id);
        if (n == text::normalize(id) || n == text::normalize(underscores_to_spaces(id)))
            return ParsedLabel::make_label(id);
    }

    auto phrase = relation_phrase(n.empty() ? std::string(text::trim(raw)) : n, options);
    auto style = lexicon.match(phrase);
    return ParsedLabel::make_hallucination(std::move(phrase), std::move(style));
}

} // namespace relanno::parsing
