#include "ontosearch/annotator.hpp"

#include <cctype>
#include <cstdlib>

#include <json.hpp>

#include "ontosearch/text.hpp"

using nlohmann::json;

namespace ontosearch {

std::string to_string(TokenLabel label) {
    switch (label) {
        case TokenLabel::Product: return "Product";
        case TokenLabel::Brand: return "Brand";
        case TokenLabel::Attribute: return "Attribute";
        case TokenLabel::NumericAttr: return "NumericAttr";
        case TokenLabel::Other: return "Other";
    }
    throw DomainError("unknown token label");
}

namespace {

/// Plain decimal magnitudes only; scientific notation and signs do not
/// occur in search queries.
bool parse_magnitude(const std::string& text, double& out) {
    if (text.empty()) return false;
    bool digit = false, dot = false;
    for (char ch : text) {
        if (ch >= '0' && ch <= '9') {
            digit = true;
        } else if (ch == '.') {
            if (dot) return false;
            dot = true;
        } else {
            return false;
        }
    }
    if (!digit) return false;
    out = std::strtod(text.c_str(), nullptr);
    return true;
}

const double* unit_factor(const std::map<std::string, double>& units, const std::string& raw) {
    std::string key = normalize_and_stem(raw);
    if (key.empty()) return nullptr;
    auto it = units.find(key);
    return it == units.end() ? nullptr : &it->second;
}

} // namespace

std::vector<NumericMatch> numeric_matches(const std::vector<std::string>& tokens,
                                          const std::map<std::string, double>& units) {
    std::vector<NumericMatch> out;
    size_t t = 0;
    while (t < tokens.size()) {
        double magnitude = 0;
        if (parse_magnitude(tokens[t], magnitude)) {
            if (t + 1 < tokens.size()) {
                if (const double* factor = unit_factor(units, tokens[t + 1])) {
                    out.push_back({{magnitude, normalize_and_stem(tokens[t + 1]),
                                    magnitude * *factor, std::nullopt},
                                   t, 2});
                    t += 2;
                    continue;
                }
            }
            t++;
            continue;
        }
        // attached form: longest numeric prefix + unit suffix
        size_t split = 0;
        while (split < tokens[t].size() &&
               ((tokens[t][split] >= '0' && tokens[t][split] <= '9') || tokens[t][split] == '.'))
            split++;
        if (split > 0 && split < tokens[t].size() &&
            parse_magnitude(tokens[t].substr(0, split), magnitude)) {
            if (const double* factor = unit_factor(units, tokens[t].substr(split))) {
                out.push_back({{magnitude, normalize_and_stem(tokens[t].substr(split)),
                                magnitude * *factor, std::nullopt},
                               t, 1});
            }
        }
        t++;
    }
    return out;
}

std::vector<NumericValue> parse_numeric(const std::vector<std::string>& tokens,
                                        const std::map<std::string, double>& units) {
    std::vector<NumericValue> out;
    for (const auto& m : numeric_matches(tokens, units)) out.push_back(m.value);
    return out;
}

namespace {

void record_id(std::vector<std::string>& ids, const std::string& id) {
    for (const auto& existing : ids)
        if (existing == id) return;
    ids.push_back(id);
}

TokenLabel label_for(ConceptKind kind) {
    switch (kind) {
        case ConceptKind::Product: return TokenLabel::Product;
        case ConceptKind::Brand: return TokenLabel::Brand;
        case ConceptKind::Attribute: return TokenLabel::Attribute;
    }
    throw DomainError("unknown concept kind");
}

} // namespace

QueryAnnotation annotate(const std::string& query, const Ontology& ontology,
                         const LstmCrfTagger* model) {
    QueryAnnotation ann;
    ann.query = query;
    std::vector<std::string> tokens = normalize_query(query);
    ann.tokens.reserve(tokens.size());
    for (const auto& tok : tokens) ann.tokens.push_back({tok, TokenLabel::Other, {}, {}});

    // lexicon pass, longest match first from every position
    size_t i = 0;
    while (i < tokens.size()) {
        std::vector<std::string> rest(tokens.begin() + (long)i, tokens.end());
        auto matches = resolve_term(ontology, rest);
        if (matches.empty()) {
            i++;
            continue;
        }
        const TermMatch& m = matches.front();
        const Concept& c = ontology.concepts.at(m.concept_id);
        for (size_t k = 0; k < m.matched_length; k++) {
            TokenAssignment& a = ann.tokens[i + k];
            a.label = label_for(c.kind);
            a.concept_id = m.concept_id;
            a.subclass = c.attribute_subclass;
        }
        switch (c.kind) {
            case ConceptKind::Product: record_id(ann.product_ids, m.concept_id); break;
            case ConceptKind::Brand: record_id(ann.brand_ids, m.concept_id); break;
            case ConceptKind::Attribute: record_id(ann.attribute_ids, m.concept_id); break;
        }
        i += m.matched_length;
    }

    // numeric pass over tokens the lexicon left alone
    for (const auto& match : numeric_matches(tokens, ontology.units)) {
        bool free = true;
        for (size_t k = 0; k < match.count; k++)
            free = free && ann.tokens[match.first + k].label == TokenLabel::Other;
        if (!free) continue;
        for (size_t k = 0; k < match.count; k++)
            ann.tokens[match.first + k].label = TokenLabel::NumericAttr;
        ann.numeric_values.push_back(match.value);
    }

    // the tagger only fills product gaps
    if (ann.product_ids.empty() && model != nullptr && !tokens.empty()) {
        auto [tags, score] = model->decode(tokens);
        size_t start = 0;
        while (start < tags.size()) {
            if (tags[start] != kTagB) {
                start++;
                continue;
            }
            size_t stop = start + 1;
            while (stop < tags.size() && tags[stop] == kTagI) stop++;
            std::vector<std::string> span(tokens.begin() + (long)start,
                                          tokens.begin() + (long)stop);

            const TermMatch* hit = nullptr;
            auto matches = resolve_term(ontology, span);
            for (const auto& m : matches)
                if (m.matched_length == span.size() && m.kind == ConceptKind::Product) {
                    hit = &m;
                    break;
                }
            for (size_t k = start; k < stop; k++) {
                if (ann.tokens[k].label != TokenLabel::Other) continue;
                ann.tokens[k].label = TokenLabel::Product;
                if (hit) ann.tokens[k].concept_id = hit->concept_id;
            }
            if (hit)
                record_id(ann.product_ids, hit->concept_id);
            else
                ann.unresolved_products.push_back(join_tokens(span));
            start = stop;
        }
    }

    ann.fallback = ann.product_ids.empty();
    return ann;
}

QueryAnnotation apply_default_product(const QueryAnnotation& annotation,
                                      const Ontology& ontology) {
    QueryAnnotation out = annotation;
    if (!out.product_ids.empty()) return out;
    for (const auto& brand : out.brand_ids) {
        auto it = ontology.default_product.find(brand);
        if (it == ontology.default_product.end()) continue;
        out.product_ids.push_back(it->second);
        out.fallback = false;
        break;
    }
    return out;
}

std::string annotation_to_json(const QueryAnnotation& annotation) {
    json j;
    j["query"] = annotation.query;
    j["tokens"] = json::array();
    for (const auto& tok : annotation.tokens) {
        json jt;
        jt["text"] = tok.text;
        jt["label"] = to_string(tok.label);
        jt["concept"] = tok.concept_id ? json(*tok.concept_id) : json(nullptr);
        j["tokens"].push_back(std::move(jt));
    }
    j["numeric"] = json::array();
    for (const auto& num : annotation.numeric_values) {
        json jn;
        jn["magnitude"] = num.magnitude;
        jn["unit"] = num.unit;
        jn["canonical_magnitude"] = num.canonical_magnitude;
        jn["attribute_hint"] = num.attribute_hint ? json(*num.attribute_hint) : json(nullptr);
        j["numeric"].push_back(std::move(jn));
    }
    j["fallback"] = annotation.fallback;
    return j.dump(2) + "\n";
}

} // namespace ontosearch
