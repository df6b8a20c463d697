#ifndef ONTOSEARCH_TEXT_HPP
#define ONTOSEARCH_TEXT_HPP

#include <string>
#include <vector>

namespace ontosearch {

/// Porter stemmer (1980 algorithm), English, lowercase input expected.
/// Words of length <= 2 and tokens containing digits are returned unchanged.
std::string porter_stem(const std::string& word);

/// Lowercases, trims surrounding punctuation, strips a possessive 's and
/// stray apostrophes. Internal hyphens survive ("q-tips" stays "q-tips").
/// May return an empty string when nothing alphanumeric is left.
std::string normalize_token(const std::string& token);

/// Whitespace-splits, normalizes each piece, stems, drops empties.
std::vector<std::string> normalize_query(const std::string& text);

/// normalize + stem a single token.
std::string normalize_and_stem(const std::string& token);

/// Normalizes a phrase the same way queries are normalized and joins the
/// surviving tokens with single spaces. Used for concept names/synonyms so
/// that lexicon lookups are exact-match.
std::string normalize_phrase(const std::string& phrase);

/// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

} // namespace ontosearch

#endif
