#include "relanno/text.hpp"

#include <array>
#include <stdexcept>

#include <unicode/unistr.h>

namespace relanno::text {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

constexpr std::array<std::string_view, 7> kQuotes = {"\"", "'", "`", "“", "”", "‘", "’"};

bool strip_prefix(std::string_view& s, std::string_view p)
{
    if (s.substr(0, p.size()) != p)
        return false;
    s.remove_prefix(p.size());
    return true;
}

bool strip_suffix(std::string_view& s, std::string_view p)
{
    if (s.size() < p.size() || s.substr(s.size() - p.size()) != p)
        return false;
    s.remove_suffix(p.size());
    return true;
}

} // namespace

std::size_t code_points(std::string_view s)
{
    std::size_t n = 0;
    for (char c : s)
        if (!is_continuation(static_cast<unsigned char>(c)))
            ++n;
    return n;
}

std::size_t byte_offset(std::string_view s, std::size_t cp)
{
    std::size_t seen = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_continuation(static_cast<unsigned char>(s[i])))
            continue;
        if (seen == cp)
            return i;
        ++seen;
    }
    if (seen == cp)
        return s.size();
    throw std::out_of_range("code point offset " + std::to_string(cp) + " past end of string");
}

std::string_view slice(std::string_view s, std::size_t begin, std::size_t end)
{
    const auto b = byte_offset(s, begin);
    const auto e = byte_offset(s, end);
    return s.substr(b, e - b);
}

std::string case_fold(std::string_view s)
{
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    u.foldCase();
    std::string out;
    u.toUTF8String(out);
    return out;
}

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : s) {
        if (is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending)
            out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

std::string normalize(std::string_view raw)
{
    const std::string folded = collapse_whitespace(case_fold(raw));
    std::string_view s = folded;

    for (bool changed = true; changed;) {
        changed = false;
        s = trim(s);
        if (strip_prefix(s, "answer:") || strip_prefix(s, "answer :")) {
            changed = true;
            continue;
        }
        for (auto q : kQuotes) {
            if (strip_prefix(s, q) || strip_suffix(s, q))
                changed = true;
        }
        while (!s.empty()) {
            const char c = s.back();
            if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || is_space(c)) {
                s.remove_suffix(1);
                changed = true;
            } else {
                break;
            }
        }
    }
    return std::string(s);
}

std::string replace_all(std::string s, std::string_view from, std::string_view to)
{
    if (from.empty())
        return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

} // namespace relanno::text
