#ifndef ONTOSEARCH_ANNOTATOR_HPP
#define ONTOSEARCH_ANNOTATOR_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ontosearch/lstm_crf.hpp"
#include "ontosearch/ontology.hpp"

namespace ontosearch {

enum class TokenLabel { Product, Brand, Attribute, NumericAttr, Other };

std::string to_string(TokenLabel label);

struct TokenAssignment {
    std::string text; // normalized + stemmed
    TokenLabel label = TokenLabel::Other;
    std::optional<std::string> concept_id; // empty for NumericAttr/Other and
                                           // for model spans the ontology missed
    std::optional<std::string> subclass;   // attribute subclass when known

    bool operator==(const TokenAssignment&) const = default;
};

struct NumericValue {
    double magnitude = 0;
    std::string unit;
    double canonical_magnitude = 0; // magnitude x unit factor (canonical = cm)
    std::optional<std::string> attribute_hint;

    bool operator==(const NumericValue&) const = default;
};

/// Every token carries exactly one assignment; product_ids is nonempty
/// exactly when fallback is false.
struct QueryAnnotation {
    std::string query; // verbatim input
    std::vector<TokenAssignment> tokens;
    std::vector<std::string> product_ids;   // resolution order, deduplicated
    std::vector<std::string> brand_ids;
    std::vector<std::string> attribute_ids;
    std::vector<NumericValue> numeric_values;
    std::vector<std::string> unresolved_products; // model spans with no concept
    bool fallback = true;

    bool operator==(const QueryAnnotation&) const = default;
};

/// A numeric pattern found in a token sequence: `<number> <unit>` over two
/// tokens or `<number><unit>` inside one.
struct NumericMatch {
    NumericValue value;
    size_t first = 0; // index of the first covered token
    size_t count = 0; // covered tokens (1 or 2)
};

std::vector<NumericMatch> numeric_matches(const std::vector<std::string>& tokens,
                                          const std::map<std::string, double>& units);

/// The values only, in token order. Unknown units never match.
std::vector<NumericValue> parse_numeric(const std::vector<std::string>& tokens,
                                        const std::map<std::string, double>& units);

/// Labels each token by lexicon longest-match (Product/Brand/Attribute),
/// then numeric patterns, leaving the rest Other. When no product resolved
/// and a tagger is supplied, its product spans fill the gap: spans that
/// match a Product concept resolve it, the rest are reported unresolved.
QueryAnnotation annotate(const std::string& query, const Ontology& ontology,
                         const LstmCrfTagger* model = nullptr);

/// When no product resolved, injects the default_product of the first
/// annotated brand that has one and clears the fallback flag.
QueryAnnotation apply_default_product(const QueryAnnotation& annotation,
                                      const Ontology& ontology);

/// {"query", "tokens":[{"text","label","concept"}], "numeric":[...], "fallback"}
std::string annotation_to_json(const QueryAnnotation& annotation);

} // namespace ontosearch

#endif
