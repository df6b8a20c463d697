#ifndef ONTOSEARCH_CLICK_GRAPH_HPP
#define ONTOSEARCH_CLICK_GRAPH_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ontosearch {

struct QueryNode {
    std::string raw;                 // first-seen verbatim text
    std::vector<std::string> tokens; // normalized + stemmed

    bool operator==(const QueryNode&) const = default;
};

struct SkuNode {
    std::string sku_id;
    std::string title;
    std::string category;

    bool operator==(const SkuNode&) const = default;
};

/// Bipartite query <-> SKU graph. Node ids are dense indices into the two
/// node vectors; adjacency lists are sorted by neighbor id.
struct ClickGraph {
    std::vector<QueryNode> queries;
    std::vector<SkuNode> skus;
    std::vector<std::vector<std::pair<int, double>>> query_edges; // query -> (sku, weight)
    std::vector<std::vector<std::pair<int, double>>> sku_edges;   // sku -> (query, weight)

    size_t edge_count() const;
    bool operator==(const ClickGraph& o) const = default;
};

struct ClickRecord {
    std::string query;
    std::string sku_id;
    std::string sku_title;
    std::string category;
    double clicks = 0;
};

struct CleanConfig {
    double weight_threshold = 2.0; // T
    double entropy_max = 1.5;      // bits
    std::set<std::string> brand_lexicon; // normalized full-query phrases
    std::set<std::string> prepositions;  // used by downstream extractors
};

struct Component {
    std::vector<int> queries;
    std::vector<int> skus;
};

/// Aggregates raw click records into the bipartite graph. Duplicate
/// (query, sku) pairs are summed; zero-click rows and queries that
/// normalize to nothing are dropped; ids follow first-seen order.
ClickGraph ingest(const std::vector<ClickRecord>& records);

/// Reads the TSV click log (header: query, sku_id, sku_title, category,
/// clicks) and ingests it. Malformed rows raise ParseError with the line
/// number.
ClickGraph ingest_tsv(const std::string& path);

/// Entropy in bits of the query's click weight across SKU categories.
/// Throws DomainError for a query without edges.
double category_entropy(const ClickGraph& graph, int query_id);

/// Removes, in order: edges below the weight threshold, queries whose
/// entropy exceeds entropy_max, brand-only queries, then isolated nodes.
ClickGraph clean(const ClickGraph& graph, const CleanConfig& config);

/// Partition of all non-isolated nodes, ordered by smallest query id.
std::vector<Component> connected_components(const ClickGraph& graph);

std::string click_graph_to_json(const ClickGraph& graph);
ClickGraph click_graph_from_json(const std::string& text);
ClickGraph load_click_graph(const std::string& path);
void save_click_graph(const ClickGraph& graph, const std::string& path);

CleanConfig load_clean_config(const std::string& path);

} // namespace ontosearch

#endif
