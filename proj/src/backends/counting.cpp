#include <cctype>

#include "relanno/backends.hpp"
#include "relanno/text.hpp"

namespace relanno::backends {

std::size_t char_count(std::string_view text) { return text::code_points(text); }

std::size_t token_count(std::string_view text)
{
    std::size_t tokens = 0;
    bool in_word = false;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            in_word = false;
        } else if (std::isalnum(c) || c == '_' || c >= 0x80) {
            if (!in_word)
                ++tokens;
            in_word = true;
        } else {
            ++tokens;
            in_word = false;
        }
    }
    return tokens;
}

} // namespace relanno::backends
