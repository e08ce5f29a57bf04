#include "mmt/text.hpp"

#include <cctype>

namespace mmt::text {

namespace {

bool is_letter(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::vector<Token> letter_runs(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_letter(s[i])) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        while (i < s.size() && is_letter(s[i])) ++i;
        tokens.push_back({begin, i});
    }
    return tokens;
}

std::vector<Token> word_tokens(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_letter(s[i])) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        while (i < s.size()) {
            if (is_letter(s[i])) {
                ++i;
            } else if (s[i] == '\'' && i + 1 < s.size() && is_letter(s[i + 1])) {
                i += 2;  // apostrophe between letters stays inside the token
            } else {
                break;
            }
        }
        tokens.push_back({begin, i});
    }
    return tokens;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::string match_case(std::string_view original, std::string_view replacement) {
    std::string out(replacement);
    if (original.empty() || out.empty()) return out;

    bool all_upper = original.size() > 1;
    for (char c : original) {
        if (is_letter(c) && std::islower(static_cast<unsigned char>(c))) {
            all_upper = false;
            break;
        }
    }
    if (all_upper) {
        for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return out;
    }
    if (std::isupper(static_cast<unsigned char>(original[0]))) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return out;
}

}  // namespace mmt::text
