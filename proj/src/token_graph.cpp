#include "ontosearch/token_graph.hpp"

#include <algorithm>

#include "ontosearch/errors.hpp"

namespace ontosearch {

std::vector<std::string> truncate_at_preposition(const std::vector<std::string>& tokens,
                                                 const std::set<std::string>& prepositions) {
    std::vector<std::string> out;
    for (const auto& tok : tokens) {
        if (prepositions.count(tok)) break;
        out.push_back(tok);
    }
    return out;
}

TokenGraph build_token_graph(const std::vector<std::vector<std::string>>& queries) {
    TokenGraph g;
    auto node = [&](const std::string& tok) {
        auto [it, inserted] = g.node_ids.try_emplace(tok, (int)g.tokens.size());
        if (inserted) g.tokens.push_back(tok);
        return it->second;
    };
    for (const auto& query : queries) {
        if (query.empty()) throw DomainError("token graph: empty query");
        int prev = node(query[0]);
        for (size_t i = 1; i < query.size(); i++) {
            int cur = node(query[i]);
            g.edges[{prev, cur}] += 1;
            prev = cur;
        }
    }
    g.in_weight.assign(g.tokens.size(), 0.0);
    g.out_weight.assign(g.tokens.size(), 0.0);
    for (const auto& [edge, w] : g.edges) {
        g.out_weight[edge.first] += w;
        g.in_weight[edge.second] += w;
    }
    return g;
}

RatioScore ratio_score(const TokenGraph& g, const std::string& token) {
    auto it = g.node_ids.find(token);
    if (it == g.node_ids.end()) throw DomainError("token not in graph: '" + token + "'");
    RatioScore s;
    s.token = token;
    s.n_in = g.in_weight[it->second];
    s.n_out = g.out_weight[it->second];
    double total = s.n_in + s.n_out;
    s.ratio = total == 0 ? 0.5 : s.n_in / total;
    return s;
}

RatioScore product_candidate(const TokenGraph& g) {
    if (g.empty()) throw DomainError("empty component: token graph has no nodes");
    RatioScore best;
    bool first = true;
    for (const auto& tok : g.tokens) {
        RatioScore s = ratio_score(g, tok);
        if (first) {
            best = s;
            first = false;
            continue;
        }
        double total = s.n_in + s.n_out;
        double best_total = best.n_in + best.n_out;
        if (s.ratio > best.ratio ||
            (s.ratio == best.ratio &&
             (total > best_total || (total == best_total && s.token < best.token))))
            best = s;
    }
    return best;
}

CandidateList extract_token_graph_candidates(const ClickGraph& graph,
                                             const CleanConfig& config) {
    std::map<std::string, int> freq;
    for (const auto& comp : connected_components(graph)) {
        std::vector<std::vector<std::string>> truncated;
        for (int q : comp.queries) {
            auto tokens = truncate_at_preposition(graph.queries[q].tokens, config.prepositions);
            if (!tokens.empty()) truncated.push_back(std::move(tokens));
        }
        if (truncated.empty()) continue; // every query began with a preposition
        TokenGraph tg = build_token_graph(truncated);
        freq[product_candidate(tg).token]++;
    }
    return rank_candidates(freq);
}

} // namespace ontosearch
