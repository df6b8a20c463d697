#include "ontosearch/click_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include <json.hpp>

#include "ontosearch/errors.hpp"
#include "ontosearch/io.hpp"
#include "ontosearch/text.hpp"

using nlohmann::json;

namespace ontosearch {

size_t ClickGraph::edge_count() const {
    size_t n = 0;
    for (const auto& adj : query_edges) n += adj.size();
    return n;
}

ClickGraph ingest(const std::vector<ClickRecord>& records) {
    ClickGraph g;
    std::map<std::string, int> query_ids; // keyed by normalized token join
    std::map<std::string, int> sku_ids;
    std::map<std::pair<int, int>, double> weights;

    size_t row = 0;
    for (const auto& rec : records) {
        row++;
        if (rec.clicks < 0)
            throw ParseError("click record " + std::to_string(row) + ": negative clicks");
        if (rec.sku_id.empty())
            throw ParseError("click record " + std::to_string(row) + ": empty sku_id");
        if (rec.clicks == 0) continue;

        auto tokens = normalize_query(rec.query);
        if (tokens.empty()) continue;
        std::string key = join_tokens(tokens);

        auto [qit, qnew] = query_ids.try_emplace(key, (int)g.queries.size());
        if (qnew) g.queries.push_back({rec.query, std::move(tokens)});
        auto [sit, snew] = sku_ids.try_emplace(rec.sku_id, (int)g.skus.size());
        if (snew) g.skus.push_back({rec.sku_id, rec.sku_title, rec.category});

        weights[{qit->second, sit->second}] += rec.clicks;
    }

    g.query_edges.resize(g.queries.size());
    g.sku_edges.resize(g.skus.size());
    for (const auto& [edge, w] : weights) {
        g.query_edges[edge.first].push_back({edge.second, w});
        g.sku_edges[edge.second].push_back({edge.first, w});
    }
    return g;
}

ClickGraph ingest_tsv(const std::string& path) {
    auto rows = read_delimited(path, '\t');
    if (rows.empty()) throw ParseError(path + ": missing header");
    const std::vector<std::string> header = {"query", "sku_id", "sku_title", "category",
                                             "clicks"};
    if (rows[0] != header)
        throw ParseError(path + ": line 1: expected header query/sku_id/sku_title/category/clicks");

    std::vector<ClickRecord> records;
    records.reserve(rows.size() - 1);
    for (size_t i = 1; i < rows.size(); i++) {
        const auto& r = rows[i];
        std::string where = path + ": line " + std::to_string(i + 1);
        if (r.size() != 5)
            throw ParseError(where + ": expected 5 tab-separated fields, got " +
                             std::to_string(r.size()));
        const char* s = r[4].c_str();
        char* end = nullptr;
        double clicks = std::strtod(s, &end);
        if (end == s || *end != '\0' || !(clicks >= 0))
            throw ParseError(where + ": bad click count '" + r[4] + "'");
        records.push_back({r[0], r[1], r[2], r[3], clicks});
    }
    return ingest(records);
}

double category_entropy(const ClickGraph& g, int query_id) {
    if (query_id < 0 || query_id >= (int)g.queries.size())
        throw DomainError("query id out of range: " + std::to_string(query_id));
    const auto& adj = g.query_edges[query_id];
    if (adj.empty())
        throw DomainError("isolated query node: '" + g.queries[query_id].raw + "'");

    std::map<std::string, double> per_category;
    double total = 0;
    for (const auto& [sku, w] : adj) {
        per_category[g.skus[sku].category] += w;
        total += w;
    }
    double h = 0;
    for (const auto& [cat, w] : per_category) {
        double p = w / total;
        if (p > 0) h -= p * std::log2(p);
    }
    return h;
}

namespace {

ClickGraph rebuild(const ClickGraph& g, const std::vector<std::vector<std::pair<int, double>>>& qadj) {
    // keep nodes with at least one surviving edge, dense ids in old order
    std::vector<int> qmap(g.queries.size(), -1), smap(g.skus.size(), -1);
    ClickGraph out;
    for (size_t q = 0; q < qadj.size(); q++) {
        if (qadj[q].empty()) continue;
        qmap[q] = (int)out.queries.size();
        out.queries.push_back(g.queries[q]);
    }
    for (size_t q = 0; q < qadj.size(); q++)
        for (const auto& [s, w] : qadj[q])
            if (smap[s] < 0) smap[s] = 0; // mark
    int next = 0;
    for (size_t s = 0; s < g.skus.size(); s++) {
        if (smap[s] == 0) {
            smap[s] = next++;
            out.skus.push_back(g.skus[s]);
        } else {
            smap[s] = -1;
        }
    }
    out.query_edges.resize(out.queries.size());
    out.sku_edges.resize(out.skus.size());
    for (size_t q = 0; q < qadj.size(); q++)
        for (const auto& [s, w] : qadj[q]) {
            out.query_edges[qmap[q]].push_back({smap[s], w});
            out.sku_edges[smap[s]].push_back({qmap[q], w});
        }
    for (auto& adj : out.query_edges) std::sort(adj.begin(), adj.end());
    for (auto& adj : out.sku_edges) std::sort(adj.begin(), adj.end());
    return out;
}

} // namespace

ClickGraph clean(const ClickGraph& g, const CleanConfig& config) {
    std::set<std::string> brands;
    for (const auto& b : config.brand_lexicon) {
        std::string norm = normalize_phrase(b);
        if (!norm.empty()) brands.insert(norm);
    }

    // 1. threshold low-weight edges
    std::vector<std::vector<std::pair<int, double>>> qadj(g.queries.size());
    for (size_t q = 0; q < g.query_edges.size(); q++)
        for (const auto& [s, w] : g.query_edges[q])
            if (w >= config.weight_threshold) qadj[q].push_back({s, w});

    for (size_t q = 0; q < qadj.size(); q++) {
        if (qadj[q].empty()) continue;

        // 2. broad queries (entropy over surviving edges)
        std::map<std::string, double> per_category;
        double total = 0;
        for (const auto& [s, w] : qadj[q]) {
            per_category[g.skus[s].category] += w;
            total += w;
        }
        double h = 0;
        for (const auto& [cat, w] : per_category) {
            double p = w / total;
            if (p > 0) h -= p * std::log2(p);
        }
        if (h > config.entropy_max) {
            qadj[q].clear();
            continue;
        }

        // 3. brand-only queries (exact full-query match)
        if (brands.count(join_tokens(g.queries[q].tokens))) qadj[q].clear();
    }

    // 4. isolated nodes dropped by the rebuild
    return rebuild(g, qadj);
}

std::vector<Component> connected_components(const ClickGraph& g) {
    std::vector<int> qcomp(g.queries.size(), -1), scomp(g.skus.size(), -1);
    std::vector<Component> out;

    for (size_t q0 = 0; q0 < g.queries.size(); q0++) {
        if (qcomp[q0] >= 0 || g.query_edges[q0].empty()) continue;
        int id = (int)out.size();
        Component comp;
        std::vector<std::pair<bool, int>> stack{{true, (int)q0}}; // (is_query, node)
        qcomp[q0] = id;
        while (!stack.empty()) {
            auto [is_query, node] = stack.back();
            stack.pop_back();
            if (is_query) {
                comp.queries.push_back(node);
                for (const auto& [s, w] : g.query_edges[node])
                    if (scomp[s] < 0) {
                        scomp[s] = id;
                        stack.push_back({false, s});
                    }
            } else {
                comp.skus.push_back(node);
                for (const auto& [q, w] : g.sku_edges[node])
                    if (qcomp[q] < 0) {
                        qcomp[q] = id;
                        stack.push_back({true, q});
                    }
            }
        }
        std::sort(comp.queries.begin(), comp.queries.end());
        std::sort(comp.skus.begin(), comp.skus.end());
        out.push_back(std::move(comp));
    }
    return out;
}

std::string click_graph_to_json(const ClickGraph& g) {
    json j;
    json queries = json::array();
    for (const auto& q : g.queries) queries.push_back({{"raw", q.raw}, {"tokens", q.tokens}});
    json skus = json::array();
    for (const auto& s : g.skus)
        skus.push_back({{"sku_id", s.sku_id}, {"title", s.title}, {"category", s.category}});
    json edges = json::array();
    for (size_t q = 0; q < g.query_edges.size(); q++)
        for (const auto& [s, w] : g.query_edges[q]) edges.push_back({q, s, w});
    j["queries"] = std::move(queries);
    j["skus"] = std::move(skus);
    j["edges"] = std::move(edges);
    return j.dump(2) + "\n";
}

ClickGraph click_graph_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("click graph: ") + e.what());
    }
    ClickGraph g;
    try {
        for (const auto& jq : j.at("queries")) {
            QueryNode q;
            q.raw = jq.at("raw").get<std::string>();
            for (const auto& t : jq.at("tokens")) q.tokens.push_back(t.get<std::string>());
            g.queries.push_back(std::move(q));
        }
        for (const auto& js : j.at("skus"))
            g.skus.push_back({js.at("sku_id").get<std::string>(),
                              js.at("title").get<std::string>(),
                              js.at("category").get<std::string>()});
        g.query_edges.resize(g.queries.size());
        g.sku_edges.resize(g.skus.size());
        for (const auto& je : j.at("edges")) {
            int q = je.at(0).get<int>();
            int s = je.at(1).get<int>();
            double w = je.at(2).get<double>();
            if (q < 0 || q >= (int)g.queries.size() || s < 0 || s >= (int)g.skus.size())
                throw ParseError("click graph: edge endpoint out of range");
            g.query_edges[q].push_back({s, w});
            g.sku_edges[s].push_back({q, w});
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("click graph: ") + e.what());
    }
    for (auto& adj : g.query_edges) std::sort(adj.begin(), adj.end());
    for (auto& adj : g.sku_edges) std::sort(adj.begin(), adj.end());
    return g;
}

ClickGraph load_click_graph(const std::string& path) {
    return click_graph_from_json(read_file(path));
}

void save_click_graph(const ClickGraph& g, const std::string& path) {
    write_file(path, click_graph_to_json(g));
}

CleanConfig load_clean_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("clean config: ") + e.what());
    }
    CleanConfig c;
    try {
        if (j.contains("weight_threshold")) c.weight_threshold = j["weight_threshold"].get<double>();
        if (j.contains("entropy_max")) c.entropy_max = j["entropy_max"].get<double>();
        if (j.contains("brand_lexicon"))
            for (const auto& b : j["brand_lexicon"])
                c.brand_lexicon.insert(b.get<std::string>());
        if (j.contains("prepositions"))
            for (const auto& p : j["prepositions"]) {
                std::string tok = normalize_and_stem(p.get<std::string>());
                if (!tok.empty()) c.prepositions.insert(tok);
            }
    } catch (const json::exception& e) {
        throw ParseError(std::string("clean config: ") + e.what());
    }
    if (c.weight_threshold < 0 || c.entropy_max < 0)
        throw ParseError("clean config: thresholds must be non-negative");
    return c;
}

} // namespace ontosearch
