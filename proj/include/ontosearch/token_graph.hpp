#ifndef ONTOSEARCH_TOKEN_GRAPH_HPP
#define ONTOSEARCH_TOKEN_GRAPH_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ontosearch/candidates.hpp"
#include "ontosearch/click_graph.hpp"

namespace ontosearch {

/// Directed graph over a component's query tokens. Edge (a,b) means a
/// immediately preceded b in at least one query; the weight counts the
/// adjacent occurrences.
struct TokenGraph {
    std::map<std::string, int> node_ids;
    std::vector<std::string> tokens;
    std::map<std::pair<int, int>, double> edges;
    std::vector<double> in_weight;  // weighted in-degree per node
    std::vector<double> out_weight; // weighted out-degree per node

    bool empty() const { return tokens.empty(); }
    bool has_token(const std::string& token) const { return node_ids.count(token) > 0; }
};

struct RatioScore {
    std::string token;
    double n_in = 0;
    double n_out = 0;
    double ratio = 0; // n_in / (n_in + n_out); 0.5 for an isolated token
};

/// Prefix of the tokens up to (excluding) the first preposition.
std::vector<std::string> truncate_at_preposition(const std::vector<std::string>& tokens,
                                                 const std::set<std::string>& prepositions);

/// One node per distinct token, one directed edge per adjacent pair.
/// Queries must be non-empty.
TokenGraph build_token_graph(const std::vector<std::vector<std::string>>& queries);

/// Weighted degrees and incoming-edge ratio for a token in the graph.
/// Throws DomainError when the token is absent.
RatioScore ratio_score(const TokenGraph& graph, const std::string& token);

/// The token maximizing the incoming-edge ratio; ties broken by larger
/// total degree, then lexicographically. Throws DomainError on an empty
/// graph.
RatioScore product_candidate(const TokenGraph& graph);

/// Runs the token-graph method over every connected component of the
/// cleaned graph: truncates queries at prepositions, takes the ratio
/// argmax per component, and aggregates candidates by the number of
/// components that produced them.
CandidateList extract_token_graph_candidates(const ClickGraph& graph,
                                             const CleanConfig& config);

} // namespace ontosearch

#endif
