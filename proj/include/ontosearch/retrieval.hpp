#ifndef ONTOSEARCH_RETRIEVAL_HPP
#define ONTOSEARCH_RETRIEVAL_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ontosearch/annotator.hpp"
#include "ontosearch/ontology.hpp"

namespace ontosearch {

struct SkuRecord {
    std::string sku_id;
    std::string title;
    std::string product_class;          // Product concept id
    std::optional<std::string> brand;   // Brand concept id
    std::set<std::string> attributes;   // Attribute concept ids
    std::optional<std::string> primary_attribute; // in attributes; Color/Material subclass
    std::map<std::string, NumericValue> numeric_attributes; // label -> value
    std::string category;

    bool operator==(const SkuRecord&) const = default;
};

/// Product-class inverted index with the ontology embedded at build time,
/// so a search invocation needs only the index file.
struct SkuIndex {
    Ontology ontology;
    std::map<std::string, SkuRecord> skus;                       // by sku_id
    std::map<std::string, std::vector<std::string>> by_product;  // product -> sorted sku ids

    bool operator==(const SkuIndex& o) const {
        return ontology == o.ontology && skus == o.skus && by_product == o.by_product;
    }
};

struct ScoreWeights {
    double w_attr = 1.0;
    double w_primary = 2.0;
    double w_brand = 1.5;
    double w_numeric = 1.0;
};

struct MatchBreakdown {
    std::vector<std::string> matched_attributes; // sorted concept ids
    bool primary = false;
    bool brand = false;
    std::vector<double> numeric_deltas; // |delta| in canonical units, one per paired value

    bool operator==(const MatchBreakdown&) const = default;
};

struct RankedResult {
    std::string sku_id;
    double score = 0;
    MatchBreakdown matched;

    bool operator==(const RankedResult&) const = default;
};

struct SearchResult {
    std::vector<RankedResult> results; // score desc, sku_id asc
    bool fallback = false;             // ranked by title overlap, not the ontology
};

/// Validates every record against the ontology and builds the inverted
/// index. Throws ValidationError listing all problems (unknown concepts,
/// duplicate sku ids, primary-attribute violations, unknown units);
/// canonical magnitudes are recomputed from the unit table.
SkuIndex index_skus(const std::vector<SkuRecord>& records, const Ontology& ontology);

/// Boost score for one SKU that already passed the product filter.
std::pair<double, MatchBreakdown> score_sku(const SkuRecord& sku,
                                            const QueryAnnotation& annotation,
                                            const Ontology& ontology,
                                            const ScoreWeights& weights);

/// Filter-then-boost retrieval: recall is every SKU whose product class is
/// in the descendants_or_self closure of a query product, ranked by
/// score_sku. Queries without a resolved product fall back to bag-of-words
/// title overlap (zero-overlap SKUs excluded) and are flagged.
SearchResult search(const QueryAnnotation& annotation, const SkuIndex& index,
                    const ScoreWeights& weights, int k);

/// JSON lines, one SkuRecord per line.
std::vector<SkuRecord> catalog_from_jsonl(const std::string& text);
std::string catalog_to_jsonl(const std::vector<SkuRecord>& records);
std::vector<SkuRecord> load_catalog(const std::string& path);

std::string index_to_json(const SkuIndex& index);
SkuIndex index_from_json(const std::string& text);
SkuIndex load_index(const std::string& path);
void save_index(const SkuIndex& index, const std::string& path);

/// CSV `rank,sku_id,score,matched_attrs,primary,brand`; attribute ids
/// joined with ';'.
std::string results_to_csv(const SearchResult& result);

} // namespace ontosearch

#endif
