#include "ontosearch/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ontosearch/io.hpp"
#include "ontosearch/text.hpp"

using nlohmann::json;

namespace ontosearch {

namespace {

bool is_primary_subclass(const Ontology& ontology, const std::string& attribute_id) {
    auto it = ontology.concepts.find(attribute_id);
    if (it == ontology.concepts.end() || !it->second.attribute_subclass) return false;
    std::string subclass = normalize_token(*it->second.attribute_subclass);
    return subclass == "color" || subclass == "material";
}

} // namespace

SkuIndex index_skus(const std::vector<SkuRecord>& records, const Ontology& ontology) {
    {
        auto ontology_violations = validate(ontology);
        if (!ontology_violations.empty())
            throw ValidationError("index: ontology invalid", ontology_violations);
    }

    std::vector<Violation> violations;
    SkuIndex index;
    index.ontology = ontology;

    for (const auto& record : records) {
        SkuRecord sku = record;
        if (sku.sku_id.empty()) {
            violations.push_back({"", "sku_id must be non-empty"});
            continue;
        }
        if (index.skus.count(sku.sku_id)) {
            violations.push_back({sku.sku_id, "duplicate sku_id"});
            continue;
        }

        auto pit = ontology.concepts.find(sku.product_class);
        if (pit == ontology.concepts.end())
            violations.push_back(
                {sku.sku_id, "unknown product_class '" + sku.product_class + "'"});
        else if (pit->second.kind != ConceptKind::Product)
            violations.push_back(
                {sku.sku_id, "product_class '" + sku.product_class + "' is not a Product"});

        if (sku.brand) {
            auto bit = ontology.concepts.find(*sku.brand);
            if (bit == ontology.concepts.end())
                violations.push_back({sku.sku_id, "unknown brand '" + *sku.brand + "'"});
            else if (bit->second.kind != ConceptKind::Brand)
                violations.push_back({sku.sku_id, "brand '" + *sku.brand + "' is not a Brand"});
        }

        for (const auto& attr : sku.attributes) {
            auto ait = ontology.concepts.find(attr);
            if (ait == ontology.concepts.end())
                violations.push_back({sku.sku_id, "unknown attribute '" + attr + "'"});
            else if (ait->second.kind != ConceptKind::Attribute)
                violations.push_back({sku.sku_id, "attribute '" + attr + "' is not an Attribute"});
        }

        if (sku.primary_attribute) {
            if (!sku.attributes.count(*sku.primary_attribute))
                violations.push_back({sku.sku_id, "primary_attribute '" + *sku.primary_attribute +
                                                      "' not in attributes"});
            else if (!is_primary_subclass(ontology, *sku.primary_attribute))
                violations.push_back({sku.sku_id, "primary_attribute '" + *sku.primary_attribute +
                                                      "' must have Color or Material subclass"});
        }

        for (auto& [label, value] : sku.numeric_attributes) {
            std::string unit = normalize_and_stem(value.unit);
            auto uit = ontology.units.find(unit);
            if (uit == ontology.units.end()) {
                violations.push_back({sku.sku_id, "unknown unit '" + value.unit + "'"});
                continue;
            }
            value.unit = unit;
            value.canonical_magnitude = value.magnitude * uit->second;
            if (!value.attribute_hint) value.attribute_hint = label;
        }

        index.skus.emplace(sku.sku_id, std::move(sku));
    }

    if (!violations.empty()) {
        std::sort(violations.begin(), violations.end(), [](const Violation& a, const Violation& b) {
            return a.concept_id != b.concept_id ? a.concept_id < b.concept_id
                                                : a.reason < b.reason;
        });
        std::string msg =
            "catalog invalid (" + std::to_string(violations.size()) + " violation";
        if (violations.size() > 1) msg += "s";
        msg += "):";
        for (const auto& v : violations)
            msg += "\n  " + (v.concept_id.empty() ? std::string("<catalog>") : v.concept_id) +
                   ": " + v.reason;
        throw ValidationError(msg, violations);
    }

    for (const auto& [sku_id, sku] : index.skus) index.by_product[sku.product_class].push_back(sku_id);
    return index;
}

std::pair<double, MatchBreakdown> score_sku(const SkuRecord& sku,
                                            const QueryAnnotation& annotation,
                                            const Ontology& ontology,
                                            const ScoreWeights& weights) {
    // exact-concept attribute matching; subclass expansion deliberately not applied
    (void)ontology;
    MatchBreakdown breakdown;
    double score = 0;

    std::set<std::string> query_attrs(annotation.attribute_ids.begin(),
                                      annotation.attribute_ids.end());
    for (const auto& attr : sku.attributes)
        if (query_attrs.count(attr)) breakdown.matched_attributes.push_back(attr);
    score += weights.w_attr * (double)breakdown.matched_attributes.size();

    if (sku.primary_attribute && query_attrs.count(*sku.primary_attribute)) {
        breakdown.primary = true;
        score += weights.w_primary;
    }

    if (sku.brand)
        for (const auto& brand : annotation.brand_ids)
            if (brand == *sku.brand) {
                breakdown.brand = true;
                score += weights.w_brand;
                break;
            }

    for (const auto& value : annotation.numeric_values) {
        if (sku.numeric_attributes.empty()) continue;
        double best = std::numeric_limits<double>::infinity();
        if (value.attribute_hint) {
            auto it = sku.numeric_attributes.find(*value.attribute_hint);
            if (it != sku.numeric_attributes.end())
                best = std::abs(value.canonical_magnitude - it->second.canonical_magnitude);
        }
        if (std::isinf(best))
            for (const auto& [label, sku_value] : sku.numeric_attributes)
                best = std::min(best, std::abs(value.canonical_magnitude -
                                               sku_value.canonical_magnitude));
        breakdown.numeric_deltas.push_back(best);
        score += weights.w_numeric / (1.0 + best);
    }

    return {score, breakdown};
}

SearchResult search(const QueryAnnotation& annotation, const SkuIndex& index,
                    const ScoreWeights& weights, int k) {
    if (k < 1) throw DomainError("search: k must be positive");

    SearchResult out;
    if (annotation.product_ids.empty()) {
        out.fallback = true;
        std::set<std::string> query_tokens;
        for (const auto& tok : annotation.tokens) query_tokens.insert(tok.text);
        for (const auto& [sku_id, sku] : index.skus) {
            std::set<std::string> title_tokens;
            for (const auto& tok : normalize_query(sku.title)) title_tokens.insert(tok);
            int overlap = 0;
            for (const auto& tok : query_tokens) overlap += title_tokens.count(tok) ? 1 : 0;
            if (overlap > 0) out.results.push_back({sku_id, (double)overlap, {}});
        }
    } else {
        std::set<std::string> recall;
        for (const auto& pid : annotation.product_ids)
            for (const auto& descendant : descendants_or_self(index.ontology, pid)) {
                auto it = index.by_product.find(descendant);
                if (it == index.by_product.end()) continue;
                recall.insert(it->second.begin(), it->second.end());
            }
        for (const auto& sku_id : recall) {
            auto [score, breakdown] =
                score_sku(index.skus.at(sku_id), annotation, index.ontology, weights);
            out.results.push_back({sku_id, score, std::move(breakdown)});
        }
    }

    std::sort(out.results.begin(), out.results.end(),
              [](const RankedResult& a, const RankedResult& b) {
                  return a.score != b.score ? a.score > b.score : a.sku_id < b.sku_id;
              });
    if ((int)out.results.size() > k) out.results.resize((size_t)k);
    return out;
}

namespace {

json sku_to_json(const SkuRecord& sku, bool with_canonical) {
    json j;
    j["sku_id"] = sku.sku_id;
    j["title"] = sku.title;
    j["product_class"] = sku.product_class;
    j["brand"] = sku.brand ? json(*sku.brand) : json(nullptr);
    j["attributes"] = sku.attributes;
    j["primary_attribute"] = sku.primary_attribute ? json(*sku.primary_attribute) : json(nullptr);
    json numerics = json::object();
    for (const auto& [label, value] : sku.numeric_attributes) {
        json jv;
        jv["magnitude"] = value.magnitude;
        jv["unit"] = value.unit;
        if (with_canonical) jv["canonical_magnitude"] = value.canonical_magnitude;
        if (value.attribute_hint) jv["attribute_hint"] = *value.attribute_hint;
        numerics[label] = std::move(jv);
    }
    j["numeric_attributes"] = std::move(numerics);
    j["category"] = sku.category;
    return j;
}

SkuRecord sku_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (const char* field : {"sku_id", "title", "product_class", "category"})
        if (!j.contains(field))
            throw ParseError(where + ": missing field '" + std::string(field) + "'");
    SkuRecord sku;
    try {
        sku.sku_id = j["sku_id"].get<std::string>();
        sku.title = j["title"].get<std::string>();
        sku.product_class = j["product_class"].get<std::string>();
        sku.category = j["category"].get<std::string>();
        if (j.contains("brand") && !j["brand"].is_null())
            sku.brand = j["brand"].get<std::string>();
        if (j.contains("attributes"))
            for (const auto& attr : j["attributes"]) sku.attributes.insert(attr.get<std::string>());
        if (j.contains("primary_attribute") && !j["primary_attribute"].is_null())
            sku.primary_attribute = j["primary_attribute"].get<std::string>();
        if (j.contains("numeric_attributes"))
            for (const auto& [label, jv] : j["numeric_attributes"].items()) {
                NumericValue value;
                value.magnitude = jv.at("magnitude").get<double>();
                value.unit = jv.at("unit").get<std::string>();
                if (jv.contains("canonical_magnitude"))
                    value.canonical_magnitude = jv["canonical_magnitude"].get<double>();
                if (jv.contains("attribute_hint") && !jv["attribute_hint"].is_null())
                    value.attribute_hint = jv["attribute_hint"].get<std::string>();
                sku.numeric_attributes.emplace(label, std::move(value));
            }
    } catch (const json::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
    return sku;
}

} // namespace

std::vector<SkuRecord> catalog_from_jsonl(const std::string& text) {
    std::vector<SkuRecord> records;
    size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? end : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string where = "catalog: line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        records.push_back(sku_from_json(j, where));
    }
    return records;
}

std::string catalog_to_jsonl(const std::vector<SkuRecord>& records) {
    std::string out;
    for (const auto& sku : records) {
        out += sku_to_json(sku, false).dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<SkuRecord> load_catalog(const std::string& path) {
    return catalog_from_jsonl(read_file(path));
}

std::string index_to_json(const SkuIndex& index) {
    json j;
    j["ontology"] = json::parse(ontology_to_json(index.ontology));
    j["skus"] = json::array();
    for (const auto& [sku_id, sku] : index.skus) j["skus"].push_back(sku_to_json(sku, true));
    return j.dump(2) + "\n";
}

SkuIndex index_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("index: ") + e.what());
    }
    if (!j.contains("ontology") || !j.contains("skus"))
        throw ParseError("index: missing 'ontology' or 'skus'");
    Ontology ontology = ontology_from_json(j["ontology"].dump());
    std::vector<SkuRecord> records;
    size_t idx = 0;
    for (const auto& js : j["skus"])
        records.push_back(sku_from_json(js, "index: skus[" + std::to_string(idx++) + "]"));
    return index_skus(records, ontology);
}

SkuIndex load_index(const std::string& path) {
    return index_from_json(read_file(path));
}

void save_index(const SkuIndex& index, const std::string& path) {
    write_file(path, index_to_json(index));
}

std::string results_to_csv(const SearchResult& result) {
    std::string out = "rank,sku_id,score,matched_attrs,primary,brand\n";
    int rank = 1;
    for (const auto& row : result.results) {
        out += std::to_string(rank++);
        out.push_back(',');
        out += row.sku_id;
        out.push_back(',');
        out += format_double(row.score);
        out.push_back(',');
        for (size_t i = 0; i < row.matched.matched_attributes.size(); i++) {
            if (i) out.push_back(';');
            out += row.matched.matched_attributes[i];
        }
        out.push_back(',');
        out += row.matched.primary ? "1" : "0";
        out.push_back(',');
        out += row.matched.brand ? "1" : "0";
        out.push_back('\n');
    }
    return out;
}

} // namespace ontosearch
