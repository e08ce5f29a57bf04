#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mmt::text {

/// Half-open byte range [begin, end) into the string a tokenizer was given.
struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    std::string_view view(std::string_view s) const { return s.substr(begin, end - begin); }
    bool operator==(const Token&) const = default;
};

/// Maximal runs of ASCII letters. "I'm" yields two tokens ("I", "m").
std::vector<Token> letter_runs(std::string_view s);

/// Word tokens: letters plus apostrophes that sit between letters,
/// so "I'm" and "don't" are single tokens. Bytes >= 0x80 break tokens,
/// which keeps the scan well-defined on arbitrary UTF-8.
std::vector<Token> word_tokens(std::string_view s);

std::string lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

/// Transfers the casing shape of `original` onto `replacement`:
/// all-caps stays all-caps, a capitalized first letter stays capitalized,
/// anything else is returned as stored in the lexicon.
std::string match_case(std::string_view original, std::string_view replacement);

}  // namespace mmt::text
