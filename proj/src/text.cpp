#include "ontosearch/text.hpp"

#include <cctype>
#include <sstream>

namespace ontosearch {

namespace {

bool keepable(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

} // namespace

std::string normalize_token(const std::string& token) {
    std::string s;
    s.reserve(token.size());
    for (char c : token)
        s.push_back((char)std::tolower((unsigned char)c));

    // possessive
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "'s") == 0)
        s.erase(s.size() - 2);

    // trim surrounding punctuation
    size_t begin = 0, end = s.size();
    while (begin < end && !keepable(s[begin])) begin++;
    while (end > begin && !keepable(s[end - 1])) end--;
    s = s.substr(begin, end - begin);

    // drop stray apostrophes, keep internal hyphens
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != '\'') out.push_back(c);
    return out;
}

std::string normalize_and_stem(const std::string& token) {
    return porter_stem(normalize_token(token));
}

std::vector<std::string> normalize_query(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string piece;
    while (in >> piece) {
        std::string norm = normalize_and_stem(piece);
        if (!norm.empty()) out.push_back(std::move(norm));
    }
    return out;
}

std::string normalize_phrase(const std::string& phrase) {
    return join_tokens(normalize_query(phrase));
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); i++) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

} // namespace ontosearch
